"""Loopback push server for tests and scenarios.

Stands in for a browser push service: accepts HTTP POSTs on per-user paths,
records every JSON body, and can be told to fail specific paths so delivery
accounting can be exercised. Runs on an ephemeral 127.0.0.1 port.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


class PushInbox:
    def __init__(self):
        self._messages: list[tuple[str, dict]] = []
        self._failing: set[str] = set()
        self._lock = threading.Lock()
        self._server: ThreadingHTTPServer | None = None
        self._thread: threading.Thread | None = None

    def start(self) -> "PushInbox":
        inbox = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", "0"))
                body = self.rfile.read(length)
                try:
                    message = json.loads(body.decode("utf-8"))
                except ValueError:
                    message = {"raw": body.decode("utf-8", "replace")}
                with inbox._lock:
                    failing = self.path in inbox._failing
                    if not failing:
                        inbox._messages.append((self.path, message))
                self.send_response(503 if failing else 201)
                self.send_header("Content-Length", "0")
                self.end_headers()

            def log_message(self, *args):
                pass

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    @property
    def base_url(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}"

    def endpoint(self, name: str) -> str:
        return f"{self.base_url}/push/{name}"

    def fail(self, name: str) -> None:
        """Make the named endpoint refuse deliveries from now on."""
        with self._lock:
            self._failing.add(f"/push/{name}")

    def messages(self) -> list[tuple[str, dict]]:
        with self._lock:
            return list(self._messages)

    def messages_for(self, name: str) -> list[dict]:
        path = f"/push/{name}"
        with self._lock:
            return [m for p, m in self._messages if p == path]

    def clear(self) -> None:
        with self._lock:
            self._messages.clear()

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
            self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
