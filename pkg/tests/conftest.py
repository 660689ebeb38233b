"""Shared fixtures: a scriptable local HTTP server and the acceptance summary."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest


@pytest.fixture
def scripted_server():
    """Factory for throwaway localhost servers.

    The handler function receives (path, payload_dict) and returns
    (status, body) where body may be a dict (sent as JSON), str, or bytes.
    """
    servers: list[ThreadingHTTPServer] = []

    def factory(handler_fn):
        class Handler(BaseHTTPRequestHandler):
            def _respond(self) -> None:
                length = int(self.headers.get("Content-Length") or 0)
                raw = self.rfile.read(length) if length else b""
                try:
                    payload = json.loads(raw) if raw else {}
                except json.JSONDecodeError:
                    payload = {"_raw": raw.decode("utf-8", "replace")}
                status, body = handler_fn(self.path, payload)
                if isinstance(body, dict):
                    data = json.dumps(body).encode("utf-8")
                elif isinstance(body, str):
                    data = body.encode("utf-8")
                else:
                    data = body
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            do_POST = _respond
            do_GET = _respond

            def log_message(self, *args):  # keep test output clean
                pass

        server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        threading.Thread(target=server.serve_forever, daemon=True).start()
        servers.append(server)
        return f"http://127.0.0.1:{server.server_port}"

    yield factory
    for server in servers:
        server.shutdown()
        server.server_close()


ACCEPTANCE_LABELS = {
    "test_metric_oracle_equivalence": "metric oracle equivalence (brute force, 1e-9)",
    "test_failure_rate_exactness": "failure-rate exactness (9/230 and 1/230)",
    "test_gradient_check": "logreg gradients vs central differences (1e-5)",
    "test_native_classifier_quality": "native classifier quality thresholds",
    "test_dataset_validation": "dataset composition validation (230 / 600)",
    "test_routing_pipeline_conformance": "routing and pipeline conformance (7 experts)",
    "test_session_transcript": "session transcript flows",
    "test_train_determinism": "training determinism (bit-identical models)",
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    status: dict[str, str] = {}
    for key, outcome in (("failed", "FAIL"), ("error", "FAIL"), ("skipped", "SKIP"), ("passed", "PASS")):
        for rep in terminalreporter.stats.get(key, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" in nodeid:
                name = nodeid.split("::")[-1]
                if status.get(name) != "FAIL":
                    status.setdefault(name, outcome)
                    if outcome == "FAIL":
                        status[name] = outcome
    if not status:
        return
    terminalreporter.section("acceptance criteria")
    for name, label in ACCEPTANCE_LABELS.items():
        if name in status:
            terminalreporter.write_line(f"[{status[name]}] {label}")
