"""GitHub REST client for repository search and metadata collection.

The API base is configurable so tests can point it at a local fixture
server. 5xx responses and connection errors are retried with exponential
backoff; an exhausted rate limit is surfaced immediately, never retried.
"""
from __future__ import annotations

import datetime as dt
import json
import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import requests

from ..errors import FormatError, NetworkError, RateLimitError

log = logging.getLogger(__name__)

DEFAULT_API_BASE = "https://api.github.com"
SEARCH_CAP = 1000
PER_PAGE = 100


@dataclass
class RepoMetadata:
    full_name: str
    html_url: str
    stargazers_count: int
    fork: bool
    default_branch: str
    language: Optional[str]
    created_at: int  # microseconds since epoch, UTC

    @classmethod
    def from_api(cls, data: dict) -> "RepoMetadata":
        try:
            meta = cls(
                full_name=data["full_name"],
                html_url=data["html_url"],
                stargazers_count=int(data["stargazers_count"]),
                fork=bool(data.get("fork", False)),
                default_branch=data.get("default_branch") or "",
                language=data.get("language"),
                created_at=parse_timestamp(data.get("created_at")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed repository record: {exc}") from None
        if meta.full_name.count("/") != 1 or meta.stargazers_count < 0:
            raise FormatError(f"malformed repository record: {meta.full_name!r}")
        return meta


@dataclass
class SearchCriteria:
    query: str
    min_stars: int = 0
    language: Optional[str] = None
    max_results: int = 100

    def __post_init__(self) -> None:
        if self.min_stars < 0:
            raise ValueError("min_stars must be >= 0")
        if not 0 < self.max_results <= SEARCH_CAP:
            raise ValueError(f"max_results must be in 1..{SEARCH_CAP} (GitHub search cap)")

    def q(self) -> str:
        parts = [self.query.strip()] if self.query.strip() else []
        if self.min_stars:
            parts.append(f"stars:>={self.min_stars}")
        if self.language:
            parts.append(f"language:{self.language}")
        return " ".join(parts)


def parse_timestamp(value) -> int:
    if value in (None, ""):
        return 0
    if isinstance(value, (int, float)):
        return int(value)
    stamp = dt.datetime.fromisoformat(str(value).replace("Z", "+00:00"))
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=dt.timezone.utc)
    delta = stamp - dt.datetime(1970, 1, 1, tzinfo=dt.timezone.utc)
    return (delta.days * 86_400 + delta.seconds) * 1_000_000 + delta.microseconds


class GitHubClient:
    """Thin synchronous client: auth header, retries, rate-limit detection."""

    def __init__(
        self,
        api_base: str = DEFAULT_API_BASE,
        token: Optional[str] = None,
        backoff: Sequence[float] = (1.0, 2.0, 4.0),
        sleep: Callable[[float], None] = time.sleep,
        timeout: float = 30.0,
    ) -> None:
        self.api_base = api_base.rstrip("/")
        self.backoff = tuple(backoff)
        self.sleep = sleep
        self.timeout = timeout
        self.session = requests.Session()
        self.session.headers["Accept"] = "application/vnd.github+json"
        self.session.headers["User-Agent"] = "miner"
        if token:
            self.session.headers["Authorization"] = f"Bearer {token}"

    def get(self, path: str, params: Optional[dict] = None) -> requests.Response:
        url = f"{self.api_base}{path}"
        last_error: Optional[NetworkError] = None
        for attempt in range(len(self.backoff) + 1):
            if attempt:
                self.sleep(self.backoff[attempt - 1])
            try:
                resp = self.session.get(url, params=params, timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = NetworkError(f"GET {url} failed: {exc}")
                continue
            if resp.status_code in (403, 429) and self._rate_limited(resp):
                reset = resp.headers.get("X-RateLimit-Reset")
                raise RateLimitError(int(reset) if reset and reset.isdigit() else None, resp.status_code)
            if resp.status_code >= 500:
                last_error = NetworkError(f"GET {url} -> HTTP {resp.status_code}", resp.status_code)
                continue
            return resp
        assert last_error is not None
        raise last_error

    @staticmethod
    def _rate_limited(resp: requests.Response) -> bool:
        if resp.headers.get("X-RateLimit-Remaining") == "0":
            return True
        return resp.status_code == 429

    def get_json(self, path: str, params: Optional[dict] = None):
        resp = self.get(path, params)
        if resp.status_code != 200:
            raise NetworkError(f"GET {self.api_base}{path} -> HTTP {resp.status_code}", resp.status_code)
        try:
            return resp.json()
        except ValueError:
            raise FormatError(f"GET {self.api_base}{path}: response is not JSON") from None


def list_repositories(
    criteria: SearchCriteria,
    api_base: str = DEFAULT_API_BASE,
    token: Optional[str] = None,
    client: Optional[GitHubClient] = None,
    raw: Optional[dict[str, dict]] = None,
) -> list[RepoMetadata]:
    """Search repositories, star-descending, deduplicated, at most max_results.

    If ``raw`` is given it is filled with the API record for each returned
    repository, keyed by full name.
    """
    client = client or GitHubClient(api_base, token)
    found: dict[str, tuple[RepoMetadata, dict]] = {}
    page = 1
    while (page - 1) * PER_PAGE < SEARCH_CAP:
        body = client.get_json(
            "/search/repositories",
            {"q": criteria.q(), "sort": "stars", "order": "desc", "per_page": PER_PAGE, "page": page},
        )
        if not isinstance(body, dict) or not isinstance(body.get("items"), list):
            raise FormatError("search response lacks an 'items' list")
        items = body["items"]
        for item in items:
            meta = RepoMetadata.from_api(item)
            if meta.stargazers_count < criteria.min_stars:
                continue
            if criteria.language and (meta.language or "").lower() != criteria.language.lower():
                continue
            found.setdefault(meta.full_name, (meta, item))
        total = body.get("total_count")
        if len(items) < PER_PAGE or (isinstance(total, int) and page * PER_PAGE >= total):
            break
        if len(found) >= criteria.max_results:
            break
        page += 1
    ranked = sorted(found.values(), key=lambda mi: (-mi[0].stargazers_count, mi[0].full_name))
    ranked = ranked[: criteria.max_results]
    if raw is not None:
        raw.update({m.full_name: item for m, item in ranked})
    return [m for m, _ in ranked]


def metadata_filename(full_name: str) -> str:
    owner, name = full_name.split("/", 1)
    return f"{owner}__{name}.json"


def write_metadata_file(out_dir: Path, record: dict, force: bool = True) -> Optional[Path]:
    path = out_dir / metadata_filename(record["full_name"])
    if path.exists() and not force:
        return None
    path.write_text(json.dumps(record, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


@dataclass
class FetchReport:
    written: list[Path] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)
    failed: list[tuple[str, str]] = field(default_factory=list)

    @property
    def partial_failure(self) -> bool:
        return bool(self.failed)


def fetch_repo_metadata(
    full_names: Sequence[str],
    out_dir: str | os.PathLike,
    api_base: str = DEFAULT_API_BASE,
    token: Optional[str] = None,
    force: bool = False,
    client: Optional[GitHubClient] = None,
) -> FetchReport:
    """Write ``<owner>__<name>.json`` per repository, one request at a time.

    Missing repositories are recorded as failures and the rest continue; a
    rate-limit response aborts with RateLimitError.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = FetchReport()
    if not full_names:
        return report
    client = client or GitHubClient(api_base, token)
    for name in full_names:
        if name.count("/") != 1:
            report.failed.append((name, "expected owner/name"))
            continue
        target = out / metadata_filename(name)
        if target.exists() and not force:
            log.warning("%s: metadata already present, skipping (use --force to refetch)", name)
            report.skipped.append(name)
            continue
        resp = client.get(f"/repos/{name}")
        if resp.status_code == 404:
            report.failed.append((name, "not found (404)"))
            continue
        if resp.status_code != 200:
            report.failed.append((name, f"HTTP {resp.status_code}"))
            continue
        try:
            record = resp.json()
        except ValueError:
            report.failed.append((name, "response is not JSON"))
            continue
        try:
            RepoMetadata.from_api(record)
        except FormatError as exc:
            report.failed.append((name, str(exc)))
            continue
        report.written.append(write_metadata_file(out, record))
    return report


def load_metadata_dir(meta_dir: str | os.PathLike) -> dict[str, dict]:
    """Metadata records keyed by full name."""
    out = {}
    for path in sorted(Path(meta_dir).glob("*.json")):
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (ValueError, UnicodeDecodeError) as exc:
            raise FormatError(f"{path}: {exc}") from None
        if isinstance(data, dict) and "full_name" in data:
            out[data["full_name"]] = data
    return out
