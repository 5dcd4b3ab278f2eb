/** Browser entry point: wires the controller to the real document and a
 * service base URL taken from the audit-api meta tag (same origin's port
 * 8000 by default).
 */

import { AuditApi } from "./api.js";
import { boot } from "./app.js";
import { hashForSession, sessionIdFromHash } from "./viewmodel.js";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app root element");
}

const meta = document.querySelector('meta[name="audit-api"]');
const baseUrl =
  (meta as HTMLMetaElement | null)?.content || "http://127.0.0.1:8000";

boot(root, {
  api: new AuditApi(baseUrl),
  url: {
    read: () => sessionIdFromHash(window.location.hash),
    write: (sessionId) => {
      window.location.hash = hashForSession(sessionId);
    },
  },
});
