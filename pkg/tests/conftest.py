"""Shared fixtures: a small moon-landing knowledge graph, snapshot writers,
and a scripted local HTTP server for backend tests."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from claimver.kg import KgNode, KnowledgeGraph, Triplet, build_graph

APOLLO_NODES = [
    KgNode("Q43653", "Apollo 11", "first crewed Moon landing mission", ("Apollo XI",)),
    KgNode("Q1615", "Neil Armstrong", "American astronaut"),
    KgNode("Q2252", "Buzz Aldrin", "American astronaut", ("Edwin Aldrin",)),
    KgNode("Q405", "Moon", "natural satellite of Earth"),
    KgNode("Q30", "United States", "country in North America",
           ("USA", "United States of America")),
    KgNode("Q2", "Earth", "third planet from the Sun"),
]

APOLLO_TRIPLETS = [
    Triplet("Q43653", "crew member", "Q1615"),
    Triplet("Q43653", "crew member", "Q2252"),
    Triplet("Q43653", "landing site", "Q405"),
    Triplet("Q1615", "country of citizenship", "Q30"),
    Triplet("Q2252", "country of citizenship", "Q30"),
    Triplet("Q405", "orbits", "Q2"),
]


@pytest.fixture
def apollo_kg() -> KnowledgeGraph:
    return build_graph(APOLLO_NODES, APOLLO_TRIPLETS)


def write_apollo_tsv(directory) -> str:
    """Write the fixture graph as TSV plus companion node file; returns the path."""
    kg_path = directory / "apollo.tsv"
    rows = []
    labels = {n.id: n.label for n in APOLLO_NODES}
    for t in APOLLO_TRIPLETS:
        rows.append(f"{t.subject}\t{labels[t.subject]}\t{t.predicate}"
                    f"\t{t.object}\t{labels[t.object]}")
    kg_path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    node_rows = [f"{n.id}\t{n.description}\t{'|'.join(n.aliases)}" for n in APOLLO_NODES]
    (directory / "apollo.nodes.tsv").write_text("\n".join(node_rows) + "\n", encoding="utf-8")
    return str(kg_path)


def write_apollo_jsonl(directory) -> str:
    kg_path = directory / "apollo.jsonl"
    labels = {n.id: n.label for n in APOLLO_NODES}
    rows = [
        json.dumps({"s_id": t.subject, "s_label": labels[t.subject], "p": t.predicate,
                    "o_id": t.object, "o_label": labels[t.object]})
        for t in APOLLO_TRIPLETS
    ]
    kg_path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    node_rows = [
        json.dumps({"id": n.id, "label": n.label, "description": n.description,
                    "aliases": list(n.aliases)})
        for n in APOLLO_NODES
    ]
    (directory / "apollo.nodes.jsonl").write_text("\n".join(node_rows) + "\n", encoding="utf-8")
    return str(kg_path)


@pytest.fixture
def tsv_kg_path(tmp_path) -> str:
    return write_apollo_tsv(tmp_path)


@pytest.fixture
def jsonl_kg_path(tmp_path) -> str:
    return write_apollo_jsonl(tmp_path)


APOLLO_TEXT = "Apollo 11 landed on the Moon. Neil Armstrong was a French citizen."

APOLLO_RESPONSE = """\
"text_span1": "Apollo 11 landed on the Moon.",
"prediction1": "Attributable",
"triplets1": "(Apollo 11, landing site, Moon)",
"rationale1": "The landing site triplet states this directly.",
"text_span2": "Neil Armstrong was a French citizen.",
"prediction2": "Contradictory",
"triplets2": "(Neil Armstrong, country of citizenship, United States)",
"rationale2": "The graph records United States citizenship.",
"""


def chat_payload(content: str) -> dict:
    """Response body shape of a chat-completion endpoint."""
    return {"choices": [{"message": {"content": content}}]}


class ScriptedServer:
    """Local HTTP server that replays a scripted list of (status, payload).

    Records every request (path, headers, parsed JSON body). Dict payloads
    are sent as JSON, strings verbatim. An exhausted script repeats its last
    entry.
    """

    def __init__(self, script):
        self.script = list(script)
        self.requests: list[dict] = []
        self._lock = threading.Lock()
        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), self._handler())
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self._thread.start()

    @property
    def url(self) -> str:
        return f"http://127.0.0.1:{self.httpd.server_address[1]}"

    def close(self):
        self.httpd.shutdown()
        self.httpd.server_close()

    def _next(self):
        with self._lock:
            if len(self.script) > 1:
                return self.script.pop(0)
            return self.script[0]

    def _handler(self):
        server = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                raw = self.rfile.read(length)
                try:
                    body = json.loads(raw) if raw else None
                except ValueError:
                    body = raw.decode("utf-8", "replace")
                server.requests.append({
                    "path": self.path,
                    "headers": {k.lower(): v for k, v in self.headers.items()},
                    "body": body,
                })
                status, payload = server._next()
                data = (json.dumps(payload) if isinstance(payload, dict) else str(payload))
                encoded = data.encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(encoded)))
                self.end_headers()
                self.wfile.write(encoded)

            def log_message(self, *args):
                pass

        return Handler


@pytest.fixture
def scripted_server():
    servers = []

    def make(script) -> ScriptedServer:
        s = ScriptedServer(script)
        servers.append(s)
        return s

    yield make
    for s in servers:
        s.close()
