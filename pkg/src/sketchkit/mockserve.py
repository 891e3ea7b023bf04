"""Deterministic mock of the completions wire protocol.

Serves POST /v1/completions from a transcript fixture so the client,
voting, and sweep logic can be exercised hermetically. The transcript
is a JSON object keyed by model name:

    {"models": {
        "sketcher": {"mode": "rules",
                     "rules": [{"prompt_contains": "def add",
                                "choices": ["    return a + b\\n"]}],
                     "default": ["pass\\n"]},
        "cycler":   {"mode": "cycle", "choices": ["a", "b"]},
        "sampler":  {"mode": "weighted", "seed": 7,
                     "choices": [{"text": "x", "weight": 3},
                                 {"text": "y", "weight": 1}]},
        "flaky":    {"mode": "script",
                     "script": [{"status": 429},
                                {"choices": ["ok"]}]}}}

rules: first rule whose prompt_contains occurs in the prompt wins; its
choices list is cycled to fill n. cycle: one global cursor across
requests. weighted: seeded weighted sampling, n independent draws.
script: each request pops the next entry; {"status": N} answers an
error, {"choices": [...]} answers with exactly those choices verbatim
(no cycling, so scripted responses may under-fill n or be empty); an
exhausted script repeats its last entry.

Every request body is recorded in order and exposed at GET /_requests
for protocol-conformance assertions.
"""

from __future__ import annotations

import argparse
import json
import random
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


class _ModelState:
    def __init__(self, spec: dict):
        self.spec = spec
        self.mode = spec.get("mode", "rules")
        self.cursor = 0
        self.rng = random.Random(spec.get("seed", 0))

    def answer(self, body: dict) -> tuple[int, dict]:
        n = int(body.get("n", 1))
        if self.mode == "rules":
            prompt = str(body.get("prompt", ""))
            choices = None
            for rule in self.spec.get("rules", []):
                if rule.get("prompt_contains", "") in prompt:
                    if "status" in rule:
                        return int(rule["status"]), {"error": "scripted"}
                    choices = rule["choices"]
                    break
            if choices is None:
                choices = self.spec.get("default", [""])
            texts = [choices[i % len(choices)] for i in range(n)] if choices else []
        elif self.mode == "cycle":
            pool = self.spec["choices"]
            texts = []
            for _ in range(n):
                texts.append(pool[self.cursor % len(pool)])
                self.cursor += 1
        elif self.mode == "weighted":
            pool = self.spec["choices"]
            words = [c["text"] for c in pool]
            weights = [float(c.get("weight", 1.0)) for c in pool]
            texts = self.rng.choices(words, weights=weights, k=n)
        elif self.mode == "script":
            script = self.spec["script"]
            entry = script[min(self.cursor, len(script) - 1)]
            self.cursor += 1
            if "status" in entry:
                return int(entry["status"]), {"error": "scripted"}
            texts = list(entry["choices"])
        else:
            return 400, {"error": f"unknown transcript mode {self.mode!r}"}
        return 200, {"choices": [{"text": t} for t in texts]}


class _Handler(BaseHTTPRequestHandler):
    # self.server is the ThreadingHTTPServer with requests/lock/models/log_file
    # grafted on by MockCompletionServer below.

    def log_message(self, fmt, *args):  # silence the default stderr chatter
        if self.server.log_file is not None:
            with open(self.server.log_file, "a", encoding="utf-8") as fh:
                fh.write(fmt % args + "\n")

    def _send_json(self, status: int, payload: dict) -> None:
        data = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def do_GET(self):
        if self.path == "/_requests":
            with self.server.lock:
                snapshot = list(self.server.requests)
            self._send_json(200, {"requests": snapshot})
        else:
            self._send_json(404, {"error": "not found"})

    def do_POST(self):
        if self.path != "/v1/completions":
            self._send_json(404, {"error": "not found"})
            return
        length = int(self.headers.get("Content-Length", "0"))
        raw = self.rfile.read(length)
        try:
            body = json.loads(raw.decode("utf-8"))
        except ValueError:
            self._send_json(400, {"error": "bad json"})
            return
        with self.server.lock:
            self.server.requests.append(body)
            model = str(body.get("model", ""))
            state = self.server.models.get(model)
            if state is None:
                status, payload = 400, {"error": f"unknown model {model!r}"}
            else:
                status, payload = state.answer(body)
        self._send_json(status, payload)


class MockCompletionServer:
    """In-process mock endpoint; bind to port 0 for tests.

    with MockCompletionServer(transcript) as base_url:
        ... point an Endpoint at base_url ...
    """

    def __init__(self, transcript: dict, port: int = 0, log_file: str | None = None):
        self.transcript = transcript
        self.log_file = log_file
        self.requests: list[dict] = []
        self.lock = threading.Lock()
        self.models = {
            name: _ModelState(spec)
            for name, spec in transcript.get("models", {}).items()
        }
        self._httpd = ThreadingHTTPServer(("127.0.0.1", port), _Handler)
        # Hang server-wide state off the HTTPServer instance the handler sees.
        self._httpd.requests = self.requests  # type: ignore[attr-defined]
        self._httpd.lock = self.lock  # type: ignore[attr-defined]
        self._httpd.models = self.models  # type: ignore[attr-defined]
        self._httpd.log_file = self.log_file  # type: ignore[attr-defined]
        self._thread: threading.Thread | None = None

    @property
    def base_url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> str:
        self._thread = threading.Thread(
            target=self._httpd.serve_forever, kwargs={"poll_interval": 0.05},
            daemon=True,
        )
        self._thread.start()
        return self.base_url

    def stop(self) -> None:
        self._httpd.shutdown()
        if self._thread is not None:
            self._thread.join(timeout=5.0)
        self._httpd.server_close()

    def __enter__(self) -> str:
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


def load_transcript(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="mock-serve",
        description="serve a completion transcript over HTTP",
    )
    parser.add_argument("--transcript", required=True, help="transcript JSON path")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--log-file", default=None)
    args = parser.parse_args(argv)
    server = MockCompletionServer(
        load_transcript(args.transcript), port=args.port, log_file=args.log_file
    )
    url = server.start()
    print(f"mock completion endpoint at {url} (Ctrl-C to stop)")
    try:
        while True:
            threading.Event().wait(3600)
    except KeyboardInterrupt:
        server.stop()
    return 0


if __name__ == "__main__":
    main()
