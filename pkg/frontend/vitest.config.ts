import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
    // the end-to-end suite spawns the audit service and walks a 36-draw
    // audit over HTTP; give it room on slow machines
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
