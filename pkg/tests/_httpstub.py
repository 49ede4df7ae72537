"""Local HTTP stubs for detector services and the chat endpoint.

Each server runs on an ephemeral localhost port in a daemon thread and counts
requests; `fail_next(n)` makes the next n requests return HTTP 500, which is
how retry behavior gets exercised without real network flakiness.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


class _Handler(BaseHTTPRequestHandler):
    server: "StubServer"

    def do_POST(self) -> None:  # noqa: N802 (http.server API)
        length = int(self.headers.get("Content-Length", "0"))
        body = json.loads(self.rfile.read(length) or b"{}")
        with self.server.lock:
            self.server.requests.append((self.path, body, dict(self.headers)))
            if self.server.failures_left > 0:
                self.server.failures_left -= 1
                self.send_response(500)
                self.end_headers()
                self.wfile.write(b"injected failure")
                return
        handler = self.server.routes.get(self.path)
        if handler is None:
            self.send_response(404)
            self.end_headers()
            return
        status, payload = handler(body)
        data = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, fmt: str, *args) -> None:  # silence test output
        pass


class StubServer(ThreadingHTTPServer):
    def __init__(self, routes: dict) -> None:
        super().__init__(("127.0.0.1", 0), _Handler)
        self.routes = routes
        self.requests: list = []
        self.failures_left = 0
        self.lock = threading.Lock()
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()

    @property
    def endpoint(self) -> str:
        host, port = self.server_address[:2]
        return f"http://{host}:{port}"

    def fail_next(self, n: int) -> None:
        with self.lock:
            self.failures_left = n

    def stop(self) -> None:
        self.shutdown()
        self.server_close()


def embedding_server(vectors_for):
    """Stub /embed endpoint; vectors_for(text) -> list[float]."""

    def handle(body: dict):
        return 200, {"vectors": [vectors_for(t) for t in body.get("texts", [])]}

    return StubServer({"/embed": handle})


def pair_server(prob_for):
    """Stub /score endpoint; prob_for(a, b) -> float."""

    def handle(body: dict):
        return 200, {"clone_probability": [prob_for(p["a"], p["b"]) for p in body.get("pairs", [])]}

    return StubServer({"/score": handle})


def chat_server(reply_for):
    """Stub chat endpoint; reply_for(body) -> str."""

    def handle(body: dict):
        return 200, {"text": reply_for(body)}

    return StubServer({"/": handle})
