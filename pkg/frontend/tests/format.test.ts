import { describe, expect, it } from "vitest";
import { formatBatches, formatStat, formatVolume } from "../src/format.js";

describe("formatStat", () => {
  it("renders P values to three decimals", () => {
    expect(formatStat(0.2431472583059634)).toBe("0.243");
    expect(formatStat(0.19776441803386605)).toBe("0.198");
    expect(formatStat(1)).toBe("1.000");
    expect(formatStat(0.955980392156862)).toBe("0.956");
  });

  it("renders taints and bounds the same way", () => {
    expect(formatStat(0.0391304347826087)).toBe("0.039");
    expect(formatStat(0.04047619047619048)).toBe("0.040");
    expect(formatStat(0)).toBe("0.000");
    expect(formatStat(22.716666666666667)).toBe("22.717");
  });
});

describe("formatBatches", () => {
  it("keeps one decimal", () => {
    expect(formatBatches(34.297064867744005)).toBe("34.3");
    expect(formatBatches(0)).toBe("0.0");
    expect(formatBatches(2.8)).toBe("2.8");
  });
});

describe("formatVolume", () => {
  it("groups thousands and keeps one decimal", () => {
    expect(formatVolume(11387.288381252352)).toBe("11,387.3");
    expect(formatVolume(999.94)).toBe("999.9");
    expect(formatVolume(1234567.89)).toBe("1,234,567.9");
    expect(formatVolume(0)).toBe("0.0");
  });
});
