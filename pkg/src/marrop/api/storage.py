"""Server-side state: uploaded elections and live sessions.

Sessions persist through the same serializer the CLI uses, so the
document on disk is identical whichever front door drove the audit. A
sidecar meta file carries what the document deliberately does not: the
optimistic-concurrency version and the owning election. Mutations take a
per-session lock and bump the version; a stale version is rejected
before any state changes.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from ..election import ElectionSpec
from ..errors import AuditError
from ..io_formats import load_election, load_session, save_election, write_session
from ..kaplan_markov import AuditSession


class NotFound(AuditError):
    """Unknown election or session id."""


class VersionConflict(AuditError):
    """The supplied resource version is stale."""


@dataclass
class SessionState:
    session: AuditSession
    election_id: str
    version: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)


class Store:
    """In-memory registry with optional directory persistence."""

    def __init__(self, data_dir: Path | None = None):
        self.data_dir = Path(data_dir) if data_dir else None
        self.elections: dict[str, ElectionSpec] = {}
        self.sessions: dict[str, SessionState] = {}
        self._registry_lock = threading.Lock()
        if self.data_dir:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            self._reload()

    # ---- persistence ----

    def _election_dir(self, election_id: str) -> Path:
        return self.data_dir / "elections" / election_id

    def _session_dir(self, session_id: str) -> Path:
        return self.data_dir / "sessions" / session_id

    def _reload(self) -> None:
        elections = self.data_dir / "elections"
        if elections.is_dir():
            for d in sorted(elections.iterdir()):
                if d.is_dir():
                    self.elections[d.name] = load_election(d)
        sessions = self.data_dir / "sessions"
        if sessions.is_dir():
            for d in sorted(sessions.iterdir()):
                meta_path = d / "meta.json"
                doc_path = d / "session.json"
                if not (meta_path.exists() and doc_path.exists()):
                    continue
                meta = json.loads(meta_path.read_text(encoding="utf-8"))
                spec = self.elections.get(meta["election_id"])
                session = load_session(doc_path, spec)
                self.sessions[d.name] = SessionState(
                    session=session,
                    election_id=meta["election_id"],
                    version=int(meta["version"]),
                )

    def _persist_session(self, session_id: str, state: SessionState) -> None:
        if not self.data_dir:
            return
        d = self._session_dir(session_id)
        d.mkdir(parents=True, exist_ok=True)
        write_session(state.session, d / "session.json")
        (d / "meta.json").write_text(
            json.dumps(
                {"election_id": state.election_id, "version": state.version}
            )
            + "\n",
            encoding="utf-8",
        )

    # ---- elections ----

    def add_election(self, spec: ElectionSpec) -> str:
        election_id = uuid.uuid4().hex[:12]
        with self._registry_lock:
            self.elections[election_id] = spec
        if self.data_dir:
            save_election(spec, self._election_dir(election_id))
        return election_id

    def get_election(self, election_id: str) -> ElectionSpec:
        try:
            return self.elections[election_id]
        except KeyError:
            raise NotFound(f"no election {election_id!r}") from None

    # ---- sessions ----

    def add_session(self, session: AuditSession, election_id: str) -> str:
        session_id = uuid.uuid4().hex[:12]
        state = SessionState(session=session, election_id=election_id)
        with self._registry_lock:
            self.sessions[session_id] = state
        self._persist_session(session_id, state)
        return session_id

    def get_session(self, session_id: str) -> SessionState:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise NotFound(f"no session {session_id!r}") from None

    def mutate(self, session_id: str, expected_version: int, action) -> SessionState:
        """Apply ``action(session)`` exactly once at the expected version."""
        state = self.get_session(session_id)
        with state.lock:
            if expected_version != state.version:
                raise VersionConflict(
                    f"session {session_id!r} is at version {state.version}, "
                    f"request used {expected_version}"
                )
            action(state.session)
            state.version += 1
            self._persist_session(session_id, state)
        return state
