"""Single-file embedded store for the verifier's records.

Five tables mirror the service's vocabulary: services, ta_codes, ta_servers,
subscriptions, ta_violations, plus a one-row monitor_state table carrying the
monitoring cursor across restarts. Writes are serialized behind one
connection-level lock; that is the whole concurrency story at desk scale and
it is enough to make concurrent provisioning linearize.

Binary values are stored as text (base64 for key/evidence bytes, hex for
measurements) so a record's serialized form is a plain JSON object of its
column values; the storage-bound checks measure exactly that form.
"""

from __future__ import annotations

import base64
import json
import sqlite3
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Optional

from ..model import Evidence

_SCHEMA = """
CREATE TABLE IF NOT EXISTS services (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    name TEXT NOT NULL,
    token TEXT NOT NULL UNIQUE,
    is_active INTEGER NOT NULL DEFAULT 1
);
CREATE TABLE IF NOT EXISTS ta_codes (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    repository TEXT NOT NULL,
    commit_id TEXT NOT NULL,
    unique_id TEXT NOT NULL,
    is_active INTEGER NOT NULL DEFAULT 1,
    ta_code_service INTEGER NOT NULL REFERENCES services(id)
);
CREATE TABLE IF NOT EXISTS ta_servers (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    domain TEXT NOT NULL,
    public_key TEXT NOT NULL,
    quote TEXT NOT NULL,
    monitor_log_id INTEGER,
    is_active INTEGER NOT NULL DEFAULT 0,
    created_at INTEGER NOT NULL,
    ta_server_service INTEGER NOT NULL REFERENCES services(id),
    ta_server_code INTEGER NOT NULL REFERENCES ta_codes(id)
);
CREATE TABLE IF NOT EXISTS subscriptions (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    endpoint TEXT NOT NULL,
    p256dh TEXT NOT NULL,
    auth TEXT NOT NULL,
    subscription_server INTEGER NOT NULL REFERENCES ta_servers(id),
    UNIQUE (endpoint, subscription_server)
);
CREATE TABLE IF NOT EXISTS ta_violations (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    created_at INTEGER NOT NULL,
    offending_log_index INTEGER NOT NULL,
    ta_violation_server INTEGER NOT NULL REFERENCES ta_servers(id),
    ta_violation_service INTEGER NOT NULL REFERENCES services(id)
);
CREATE TABLE IF NOT EXISTS monitor_state (
    id INTEGER PRIMARY KEY CHECK (id = 1),
    next_index INTEGER NOT NULL
);
"""


@dataclass(frozen=True)
class ServiceAccount:
    id: int
    name: str
    token: str
    is_active: bool


@dataclass(frozen=True)
class TaCode:
    id: int
    repository: str
    commit_id: str
    rv_hex: str
    is_active: bool
    service: int

    def record(self) -> dict:
        return {
            "id": self.id,
            "repository": self.repository,
            "commit_id": self.commit_id,
            "unique_id": self.rv_hex,
            "is_active": self.is_active,
            "ta_code_service": self.service,
        }


@dataclass(frozen=True)
class TaServer:
    id: int
    domain: str
    public_key: bytes
    quote: Evidence
    monitor_log_id: Optional[int]
    is_active: bool
    created_at: int
    service: int
    code: int

    def record(self) -> dict:
        return {
            "id": self.id,
            "domain": self.domain,
            "public_key": base64.b64encode(self.public_key).decode("ascii"),
            "quote": self.quote.to_base64(),
            "monitor_log_id": self.monitor_log_id,
            "is_active": self.is_active,
            "created_at": self.created_at,
            "ta_server_service": self.service,
            "ta_server_code": self.code,
        }


@dataclass(frozen=True)
class Subscription:
    id: int
    endpoint: str
    p256dh: str
    auth: str
    server: int

    def record(self) -> dict:
        return {
            "id": self.id,
            "endpoint": self.endpoint,
            "p256dh": self.p256dh,
            "auth": self.auth,
            "subscription_server": self.server,
        }


@dataclass(frozen=True)
class TaViolation:
    id: int
    created_at: int
    offending_log_index: int
    server: int
    service: int

    def record(self) -> dict:
        return {
            "id": self.id,
            "created_at": self.created_at,
            "offending_log_index": self.offending_log_index,
            "ta_violation_server": self.server,
            "ta_violation_service": self.service,
        }


def serialized_size(record_obj) -> int:
    """Byte length of the record's canonical JSON form."""
    return len(json.dumps(record_obj.record(), sort_keys=True, separators=(",", ":")).encode("utf-8"))


def _subscription_size(endpoint: str, p256dh: str, auth: str, server_id: int, sub_id: int) -> int:
    return serialized_size(Subscription(sub_id, endpoint, p256dh, auth, server_id))


class Store:
    def __init__(self, path: str = ":memory:"):
        self.path = path
        self._conn = sqlite3.connect(path, check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        if path != ":memory:":
            self._conn.execute("PRAGMA journal_mode=WAL")
        self._lock = threading.RLock()
        with self.transaction():
            self._conn.executescript(_SCHEMA)

    def close(self) -> None:
        self._conn.close()

    @contextmanager
    def transaction(self):
        """Serialize a multi-statement mutation; nested use shares the lock."""
        with self._lock:
            try:
                yield self._conn
                self._conn.commit()
            except BaseException:
                self._conn.rollback()
                raise

    # -- services ----------------------------------------------------------

    def insert_service(self, name: str, token: str) -> ServiceAccount:
        with self.transaction() as conn:
            cur = conn.execute(
                "INSERT INTO services (name, token, is_active) VALUES (?, ?, 1)", (name, token)
            )
            return ServiceAccount(id=cur.lastrowid, name=name, token=token, is_active=True)

    def service_by_token(self, token: str) -> Optional[ServiceAccount]:
        row = self._conn.execute("SELECT * FROM services WHERE token = ?", (token,)).fetchone()
        return self._service(row) if row else None

    def service_by_id(self, service_id: int) -> Optional[ServiceAccount]:
        row = self._conn.execute("SELECT * FROM services WHERE id = ?", (service_id,)).fetchone()
        return self._service(row) if row else None

    @staticmethod
    def _service(row: sqlite3.Row) -> ServiceAccount:
        return ServiceAccount(
            id=row["id"], name=row["name"], token=row["token"], is_active=bool(row["is_active"])
        )

    # -- ta codes ----------------------------------------------------------

    def insert_ta_code(self, repository: str, commit_id: str, rv_hex: str, service_id: int) -> TaCode:
        with self.transaction() as conn:
            cur = conn.execute(
                "INSERT INTO ta_codes (repository, commit_id, unique_id, is_active, ta_code_service)"
                " VALUES (?, ?, ?, 1, ?)",
                (repository, commit_id, rv_hex, service_id),
            )
            return TaCode(cur.lastrowid, repository, commit_id, rv_hex, True, service_id)

    def ta_code_by_id(self, code_id: int) -> Optional[TaCode]:
        row = self._conn.execute("SELECT * FROM ta_codes WHERE id = ?", (code_id,)).fetchone()
        if not row:
            return None
        return TaCode(
            id=row["id"],
            repository=row["repository"],
            commit_id=row["commit_id"],
            rv_hex=row["unique_id"],
            is_active=bool(row["is_active"]),
            service=row["ta_code_service"],
        )

    def deactivate_ta_code(self, code_id: int) -> None:
        with self.transaction() as conn:
            conn.execute("UPDATE ta_codes SET is_active = 0 WHERE id = ?", (code_id,))

    # -- ta servers ---------------------------------------------------------

    def insert_ta_server(
        self,
        domain: str,
        public_key: bytes,
        quote: Evidence,
        created_at: int,
        service_id: int,
        code_id: int,
    ) -> TaServer:
        with self.transaction() as conn:
            cur = conn.execute(
                "INSERT INTO ta_servers (domain, public_key, quote, monitor_log_id, is_active,"
                " created_at, ta_server_service, ta_server_code) VALUES (?, ?, ?, NULL, 0, ?, ?, ?)",
                (
                    domain,
                    base64.b64encode(public_key).decode("ascii"),
                    quote.to_base64(),
                    created_at,
                    service_id,
                    code_id,
                ),
            )
            return TaServer(
                id=cur.lastrowid,
                domain=domain,
                public_key=public_key,
                quote=quote,
                monitor_log_id=None,
                is_active=False,
                created_at=created_at,
                service=service_id,
                code=code_id,
            )

    @staticmethod
    def _server(row: sqlite3.Row) -> TaServer:
        return TaServer(
            id=row["id"],
            domain=row["domain"],
            public_key=base64.b64decode(row["public_key"]),
            quote=Evidence.from_base64(row["quote"]),
            monitor_log_id=row["monitor_log_id"],
            is_active=bool(row["is_active"]),
            created_at=row["created_at"],
            service=row["ta_server_service"],
            code=row["ta_server_code"],
        )

    def ta_servers_for_domain(self, domain: str) -> list[TaServer]:
        """Every registration row for the domain, oldest first. Callers that
        need "the" server take the last one; materializing the full history
        is the read pattern the status endpoint is specified around."""
        rows = self._conn.execute(
            "SELECT * FROM ta_servers WHERE domain = ? ORDER BY id", (domain,)
        ).fetchall()
        return [self._server(row) for row in rows]

    def latest_ta_server(self, domain: str) -> Optional[TaServer]:
        servers = self.ta_servers_for_domain(domain)
        return servers[-1] if servers else None

    def ta_server_by_id(self, server_id: int) -> Optional[TaServer]:
        row = self._conn.execute("SELECT * FROM ta_servers WHERE id = ?", (server_id,)).fetchone()
        return self._server(row) if row else None

    def activate_ta_server(self, server_id: int, monitor_log_id: int) -> None:
        with self.transaction() as conn:
            conn.execute(
                "UPDATE ta_servers SET is_active = 1, monitor_log_id = ? WHERE id = ?",
                (monitor_log_id, server_id),
            )

    def deactivate_ta_server(self, server_id: int) -> None:
        with self.transaction() as conn:
            conn.execute("UPDATE ta_servers SET is_active = 0 WHERE id = ?", (server_id,))

    def active_server_count(self, domain: str) -> int:
        row = self._conn.execute(
            "SELECT COUNT(*) AS n FROM ta_servers WHERE domain = ? AND is_active = 1", (domain,)
        ).fetchone()
        return row["n"]

    # -- subscriptions -------------------------------------------------------

    def find_subscription(self, endpoint: str, server_id: int) -> Optional[Subscription]:
        row = self._conn.execute(
            "SELECT * FROM subscriptions WHERE endpoint = ? AND subscription_server = ?",
            (endpoint, server_id),
        ).fetchone()
        return self._subscription(row) if row else None

    def insert_subscription(self, endpoint: str, p256dh: str, auth: str, server_id: int) -> Subscription:
        with self.transaction() as conn:
            cur = conn.execute(
                "INSERT INTO subscriptions (endpoint, p256dh, auth, subscription_server)"
                " VALUES (?, ?, ?, ?)",
                (endpoint, p256dh, auth, server_id),
            )
            return Subscription(cur.lastrowid, endpoint, p256dh, auth, server_id)

    @staticmethod
    def _subscription(row: sqlite3.Row) -> Subscription:
        return Subscription(
            id=row["id"],
            endpoint=row["endpoint"],
            p256dh=row["p256dh"],
            auth=row["auth"],
            server=row["subscription_server"],
        )

    def subscriptions_for_server(self, server_id: int) -> list[Subscription]:
        rows = self._conn.execute(
            "SELECT * FROM subscriptions WHERE subscription_server = ? ORDER BY id", (server_id,)
        ).fetchall()
        return [self._subscription(row) for row in rows]

    def all_subscriptions(self) -> list[Subscription]:
        rows = self._conn.execute("SELECT * FROM subscriptions ORDER BY id").fetchall()
        return [self._subscription(row) for row in rows]

    # -- violations ----------------------------------------------------------

    def insert_violation(
        self, created_at: int, offending_log_index: int, server_id: int, service_id: int
    ) -> TaViolation:
        with self.transaction() as conn:
            cur = conn.execute(
                "INSERT INTO ta_violations (created_at, offending_log_index, ta_violation_server,"
                " ta_violation_service) VALUES (?, ?, ?, ?)",
                (created_at, offending_log_index, server_id, service_id),
            )
            return TaViolation(cur.lastrowid, created_at, offending_log_index, server_id, service_id)

    @staticmethod
    def _violation(row: sqlite3.Row) -> TaViolation:
        return TaViolation(
            id=row["id"],
            created_at=row["created_at"],
            offending_log_index=row["offending_log_index"],
            server=row["ta_violation_server"],
            service=row["ta_violation_service"],
        )

    def violations_for_server(self, server_id: int) -> list[TaViolation]:
        rows = self._conn.execute(
            "SELECT * FROM ta_violations WHERE ta_violation_server = ? ORDER BY id", (server_id,)
        ).fetchall()
        return [self._violation(row) for row in rows]

    def violation_count(self) -> int:
        return self._conn.execute("SELECT COUNT(*) AS n FROM ta_violations").fetchone()["n"]

    # -- monitoring cursor ----------------------------------------------------

    def monitor_cursor(self) -> int:
        row = self._conn.execute("SELECT next_index FROM monitor_state WHERE id = 1").fetchone()
        return row["next_index"] if row else 0

    def set_monitor_cursor(self, next_index: int) -> None:
        # callers update the cursor inside their own transaction
        self._conn.execute(
            "INSERT INTO monitor_state (id, next_index) VALUES (1, ?)"
            " ON CONFLICT (id) DO UPDATE SET next_index = excluded.next_index",
            (next_index,),
        )
