from __future__ import annotations

import json
import threading
from collections import defaultdict
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlsplit

import pytest

from gitfixtures import make_fixture_repos
from miner.ingest.build import build_dataset
from miner.ingest.git import clone_repositories

ANNOTATION_QUERY = """\
o: output sum[project: string] of int;

visit(input, visitor {
    before node: CodeRepository -> {
        snapshot := getsnapshot(node);
        foreach (i: int; def(snapshot[i]))
            visit(snapshot[i]);
        stop;
    }
    before mod: Modifier -> {
        if (mod.kind == ModifierKind.ANNOTATION)
            o[input.id] << 1;
    }
});
"""

FIXTURE_METADATA = {
    "acme/alpha": {"stargazers_count": 42, "language": "Java", "created_at": "2019-05-01T10:00:00Z"},
    "acme/beta": {"stargazers_count": 7, "language": "Java", "created_at": "2018-01-02T03:04:05Z"},
    "zeta/gamma": {"stargazers_count": 0, "language": None, "created_at": "2021-12-31T23:59:59Z"},
}


def api_record(full_name: str, **extra) -> dict:
    owner, name = full_name.split("/")
    rec = {
        "full_name": full_name,
        "name": name,
        "owner": {"login": owner},
        "html_url": f"https://github.com/{full_name}",
        "clone_url": f"https://github.com/{full_name}.git",
        "stargazers_count": 0,
        "fork": False,
        "default_branch": "main",
        "language": "Java",
        "created_at": "2020-01-01T00:00:00Z",
    }
    rec.update(extra)
    return rec


# fixture repositories and datasets


@pytest.fixture(scope="session")
def fixture_repos(tmp_path_factory):
    root = tmp_path_factory.mktemp("work")
    return make_fixture_repos(root)


@pytest.fixture(scope="session")
def fixture_clones(tmp_path_factory, fixture_repos):
    dest = tmp_path_factory.mktemp("clones")
    report = clone_repositories([str(r.path) for r in fixture_repos], dest, jobs=2)
    assert not report.failed, report.failed
    return dest


@pytest.fixture(scope="session")
def fixture_metadata(tmp_path_factory):
    out = tmp_path_factory.mktemp("meta")
    for name, extra in FIXTURE_METADATA.items():
        rec = api_record(name, **extra)
        (out / (name.replace("/", "__") + ".json")).write_text(json.dumps(rec), encoding="utf-8")
    return out


@pytest.fixture(scope="session")
def fixture_dataset(tmp_path_factory, fixture_clones, fixture_metadata) -> Path:
    out = tmp_path_factory.mktemp("ds") / "fixture"
    build_dataset(fixture_clones, fixture_metadata, out, "fixture", jobs=1)
    return out


# local HTTP server standing in for the GitHub API


class FakeGitHub:
    """Canned responses keyed by path; records every request it serves."""

    def __init__(self) -> None:
        self.repos: dict[str, dict] = {}
        self.search_items: list[dict] = []
        self.rate_limited = False
        self.reset_time = 1_700_000_000
        self.fail_5xx: dict[str, int] = defaultdict(int)  # path -> remaining 5xx responses
        self.requests: list[tuple[str, dict, dict]] = []
        self.per_page_cap = 100

    def handle(self, path: str, query: dict, headers: dict):
        self.requests.append((path, query, headers))
        if self.rate_limited:
            return 403, {"X-RateLimit-Remaining": "0", "X-RateLimit-Reset": str(self.reset_time)}, {
                "message": "API rate limit exceeded"
            }
        if self.fail_5xx[path] > 0:
            self.fail_5xx[path] -= 1
            return 502, {}, {"message": "bad gateway"}
        if path.startswith("/repos/"):
            name = path[len("/repos/"):]
            if name in self.repos:
                return 200, {}, self.repos[name]
            return 404, {}, {"message": "Not Found"}
        if path == "/search/repositories":
            page = int(query.get("page", ["1"])[0])
            per_page = min(int(query.get("per_page", ["30"])[0]), self.per_page_cap)
            items = self.search_items[(page - 1) * per_page: page * per_page]
            return 200, {}, {"total_count": len(self.search_items), "items": items}
        return 404, {}, {"message": "Not Found"}


@pytest.fixture
def github_server():
    fake = FakeGitHub()

    class Handler(BaseHTTPRequestHandler):
        def do_GET(self):
            parts = urlsplit(self.path)
            status, headers, body = fake.handle(parts.path, parse_qs(parts.query), dict(self.headers))
            data = json.dumps(body).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            for k, v in headers.items():
                self.send_header(k, v)
            self.end_headers()
            self.wfile.write(data)

        def log_message(self, *args):
            pass

    server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=server.serve_forever, kwargs={"poll_interval": 0.02}, daemon=True)
    thread.start()
    fake.url = f"http://127.0.0.1:{server.server_address[1]}"
    try:
        yield fake
    finally:
        server.shutdown()
        server.server_close()


# one summary line per acceptance criterion

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m:
            number, title = m.args
            _CRITERIA.setdefault(number, {"title": title, "outcomes": [], "details": []})


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for number, info in _CRITERIA.items():
        if _marked(report, number):
            info["outcomes"].append(report.outcome)
            info["details"] += [v[1] for v in report.user_properties if v[0] == "detail"]


def _marked(report, number) -> bool:
    return any(
        isinstance(v, tuple) and v[:1] == ("criterion",) and v[1] == number
        for v in getattr(report, "user_properties", [])
    )


@pytest.fixture(autouse=True)
def _tag_criterion(request):
    m = request.node.get_closest_marker("criterion")
    if m:
        request.node.user_properties.append(("criterion", m.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        info = _CRITERIA[number]
        outcomes = info["outcomes"]
        if not outcomes:
            status = "NOT RUN"
        elif "failed" in outcomes:
            status = "FAIL"
        elif all(o == "skipped" for o in outcomes):
            status = "SKIP"
        else:
            status = "PASS"
        terminalreporter.write_line(f"criterion {number}: {status} - {info['title']}")
        for detail in info["details"]:
            terminalreporter.write_line(f"    {detail}")
