"""HTTP stub emulating an external generative resolver, for tests and local development.

Speaks the wire protocol of RemoteResolver: POST /v1/resolve with
{"base", "v1", "v2", "input_token_limit", "output_token_limit"} returning
{"lines": [...], "truncated": bool}. The configured mode selects one of the
canned behaviors (echo-v1, echo-v2, empty, truncate, slow, garbage).
"""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .resolvers import DEFAULT_OUTPUT_TOKEN_LIMIT, STUB_MODES, stub_response


class _StubHandler(BaseHTTPRequestHandler):
    server: "StubServer"

    def log_message(self, format, *args):  # quiet by default
        if self.server.verbose:
            super().log_message(format, *args)

    def _send_json(self, code: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path == "/stats":
            self._send_json(200, {"calls": self.server.calls, "mode": self.server.mode})
        else:
            self._send_json(404, {"error": f"no such route: {self.path}"})

    def do_POST(self):
        if self.path != "/v1/resolve":
            self._send_json(404, {"error": f"no such route: {self.path}"})
            return
        with self.server.lock:
            self.server.calls += 1
        try:
            length = int(self.headers.get("Content-Length", "0"))
            payload = json.loads(self.rfile.read(length))
            v1 = payload["v1"]
            v2 = payload["v2"]
            output_limit = int(payload.get("output_token_limit", DEFAULT_OUTPUT_TOKEN_LIMIT))
        except (ValueError, KeyError, TypeError) as exc:
            self._send_json(400, {"error": f"bad request: {exc}"})
            return
        mode = self.server.mode
        if mode == "slow":
            time.sleep(self.server.slow_delay)
        if mode == "garbage":
            body = b"%% this is not json %%"
            self.send_response(200)
            self.send_header("Content-Type", "text/plain")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)
            return
        lines, truncated = stub_response(mode, v1, v2, output_limit)
        self._send_json(200, {"lines": lines, "truncated": truncated})


class StubServer(ThreadingHTTPServer):
    """Threaded stub server; use start()/stop() from tests or serve_forever() from the CLI."""

    daemon_threads = True  # a sleeping slow-mode handler must not block shutdown

    def __init__(self, mode: str = "echo-v1", port: int = 0, slow_delay: float = 2.0, verbose: bool = False):
        if mode not in STUB_MODES:
            raise ValueError(f"unknown stub mode {mode!r}; expected one of {STUB_MODES}")
        super().__init__(("127.0.0.1", port), _StubHandler)
        self.mode = mode
        self.slow_delay = slow_delay
        self.verbose = verbose
        self.calls = 0
        self.lock = threading.Lock()
        self._thread: threading.Thread | None = None

    @property
    def url(self) -> str:
        return f"http://{self.server_address[0]}:{self.server_address[1]}"

    def start(self) -> "StubServer":
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self.shutdown()
        self.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
