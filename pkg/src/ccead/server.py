"""HTTP inference service.

One model, loaded once and never mutated; every request decodes against it
with private state. Decodes run on a single worker so a stuck or slow
request sheds load with 503 instead of piling up threads.
"""

import json
import logging
import sys
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from . import __version__
from .model import correct_once, load_model

log = logging.getLogger(__name__)

MAX_TEXT_CHARS = 1024
MAX_BODY_BYTES = 64 * 1024
DEFAULT_TIMEOUT = 10.0


class AppState:
    """Shared immutable model plus the few counters that do change."""

    def __init__(self, model, vocab, timeout=DEFAULT_TIMEOUT):
        self.model = model
        self.vocab = vocab
        self.timeout = timeout
        self.executor = ThreadPoolExecutor(max_workers=1)
        self._lock = threading.Lock()
        self._requests = 0

    def count_request(self):
        with self._lock:
            self._requests += 1
            return self._requests

    @property
    def requests(self):
        with self._lock:
            return self._requests


class Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    state = None  # type: AppState

    def log_message(self, fmt, *args):
        log.debug("%s " + fmt, self.address_string(), *args)

    def _cors(self):
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")

    def _reply(self, status, payload, content_type="application/json"):
        body = payload if isinstance(payload, bytes) else \
            json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self._cors()
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _error(self, status, message, **extra):
        self._reply(status, dict({"error": message}, **extra))

    def do_OPTIONS(self):
        self.send_response(204)
        self._cors()
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        if self.path == "/healthz":
            self._reply(200, b"ok", content_type="text/plain; charset=utf-8")
        elif self.path == "/version":
            self._reply(200, {"version": __version__, "api": "v1"})
        else:
            self._error(404, "no such endpoint")

    def do_POST(self):
        if self.path != "/api/v1/correct":
            self._error(404, "no such endpoint")
            return
        try:
            length = int(self.headers.get("Content-Length", ""))
        except ValueError:
            self.close_connection = True
            self._error(400, "Content-Length required")
            return
        if length > MAX_BODY_BYTES:
            # reply without draining the body, so the connection cannot
            # be reused for a next request
            self.close_connection = True
            self._error(413, "request body too large")
            return
        try:
            request = json.loads(self.rfile.read(length).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            self._error(400, "body is not valid JSON")
            return
        if not isinstance(request, dict) or not isinstance(request.get("text"), str):
            self._error(400, "expected an object with a string 'text' field")
            return
        text = request["text"]
        max_completions = request.get("max_completions", 1)
        if not isinstance(max_completions, int) or max_completions < 0:
            self._error(400, "max_completions must be a nonnegative integer")
            return
        if len(text) > MAX_TEXT_CHARS:
            self._error(413, "text exceeds %d characters" % MAX_TEXT_CHARS)
            return
        state = self.state
        state.count_request()
        start = time.perf_counter()
        future = state.executor.submit(
            correct_once, state.model, state.vocab, text, max_completions)
        try:
            corrected, completions, tokens = future.result(timeout=state.timeout)
        except FutureTimeout:
            future.cancel()
            self._error(503, "server busy, try again")
            return
        except Exception:
            error_id = uuid.uuid4().hex[:12]
            log.exception("decode failed [%s]", error_id)
            self._error(500, "internal error", id=error_id)
            return
        latency_ms = (time.perf_counter() - start) * 1000.0
        self._reply(200, {
            "corrected": corrected,
            "completions": completions,
            "tokens": tokens,
            "latency_ms": latency_ms,
        })


class QuietServer(ThreadingHTTPServer):
    daemon_threads = True

    def handle_error(self, request, client_address):
        # client hangups are routine, everything else goes to the log
        exc = sys.exc_info()[1]
        if isinstance(exc, (BrokenPipeError, ConnectionResetError)):
            log.debug("client %s disconnected", client_address)
        else:
            log.exception("error handling request from %s", client_address)


def make_server(checkpoint_path, port, host="127.0.0.1",
                timeout=DEFAULT_TIMEOUT):
    """Load the checkpoint and return an unstarted HTTP server."""
    model, vocab, _ = load_model(checkpoint_path)
    state = AppState(model, vocab, timeout)

    class BoundHandler(Handler):
        pass

    BoundHandler.state = state
    httpd = QuietServer((host, port), BoundHandler)
    return httpd, state


def serve(checkpoint_path, port, host="127.0.0.1", timeout=DEFAULT_TIMEOUT):
    httpd, _ = make_server(checkpoint_path, port, host, timeout)
    log.info("serving on %s:%d", host, httpd.server_address[1])
    try:
        httpd.serve_forever()
    finally:
        httpd.server_close()
