"""CVE lookup against the NVD REST API v2.0, with a disk cache.

Live responses are cached raw under ``<cache_dir>/<CVE-ID>.json`` and
served from cache within the TTL. Fixture files in the same API shape
can be imported for fully offline operation; live and fixture payloads
go through the same parsing code path.
"""

from __future__ import annotations

import enum
import json
import re
import threading
import time
from collections import deque
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Callable, Iterable, Optional

import httpx

DEFAULT_BASE_URL = "https://services.nvd.nist.gov/rest/json/cves/2.0"
DEFAULT_TTL = timedelta(hours=24)
#: NVD's published public limit; with an API key the budget is 50/30s.
PUBLIC_RATE_BUDGET = (5, 30.0)
KEYED_RATE_BUDGET = (50, 30.0)

CVE_ID_RE = re.compile(r"^CVE-\d{4}-\d{4,}$")


class NvdError(Exception):
    """Base class for CVE-lookup errors."""


class InvalidId(NvdError):
    pass


class NotFound(NvdError):
    pass


class RateLimited(NvdError):
    def __init__(self, message: str, retry_after: float) -> None:
        super().__init__(message)
        self.retry_after = retry_after


class NetworkError(NvdError):
    pass


class MalformedResponse(NvdError):
    pass


class FileError(NvdError):
    pass


class Source(str, enum.Enum):
    NVD = "Nvd"
    MANUAL = "Manual"
    FIXTURE = "Fixture"


@dataclass(frozen=True)
class CveRecord:
    """One CVE: description, references and its CVSS vector strings."""

    cve_id: str
    description: str
    references: tuple[str, ...]
    cvss_vectors: tuple[tuple[str, str], ...]  # (version, vector string)
    source: Source
    fetched_at: Optional[datetime] = None

    def vector_for(self, version: str) -> Optional[str]:
        for v, text in self.cvss_vectors:
            if v == version:
                return text
        return None


def canonical_cve_id(cve_id: str) -> str:
    """Uppercase-canonical CVE id; raises InvalidId on pattern violation."""
    candidate = cve_id.strip().upper()
    if not CVE_ID_RE.match(candidate):
        raise InvalidId(f"{cve_id!r} does not match CVE-YYYY-NNNN…")
    return candidate


def _parse_vulnerability(item: dict, source: Source, fetched_at: Optional[datetime]) -> CveRecord:
    try:
        cve = item["cve"]
        cve_id = canonical_cve_id(cve["id"])
        description = next(
            (d["value"] for d in cve.get("descriptions", []) if d.get("lang") == "en"),
            "",
        )
        references = tuple(r["url"] for r in cve.get("references", []))
        vectors: dict[str, str] = {}
        metrics = cve.get("metrics", {})
        for key, version in (("cvssMetricV40", "4.0"), ("cvssMetricV31", "3.1")):
            entries = metrics.get(key, [])
            # NVD lists the primary (NVD-assigned) entry first in
            # precedence; keep exactly one vector per version.
            ordered = sorted(
                entries, key=lambda e: 0 if e.get("type") == "Primary" else 1
            )
            if ordered:
                vectors[version] = ordered[0]["cvssData"]["vectorString"]
    except (KeyError, TypeError, ValueError, InvalidId) as exc:
        raise MalformedResponse(f"unexpected NVD payload shape: {exc}") from exc
    return CveRecord(
        cve_id=cve_id,
        description=description,
        references=references,
        cvss_vectors=tuple(sorted(vectors.items())),
        source=source,
        fetched_at=fetched_at,
    )


def parse_api_response(
    data: dict, source: Source, fetched_at: Optional[datetime] = None
) -> list[CveRecord]:
    """Parse an NVD API v2.0 response body into records."""
    if not isinstance(data, dict) or "vulnerabilities" not in data:
        raise MalformedResponse("missing 'vulnerabilities' array")
    return [
        _parse_vulnerability(item, source, fetched_at)
        for item in data["vulnerabilities"]
    ]


def import_fixture(path: Path | str) -> list[CveRecord]:
    """Load CVE records from an NVD-shaped JSON file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FileError(f"cannot read fixture {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedResponse(f"fixture {path} is not valid JSON: {exc}") from exc
    return parse_api_response(data, Source.FIXTURE)


class _RateLimiter:
    """Sliding-window budget; callers block until a slot frees up."""

    def __init__(
        self,
        budget: tuple[int, float],
        clock: Callable[[], float],
        sleep: Callable[[float], None],
    ) -> None:
        self.max_requests, self.window = budget
        self._clock = clock
        self._sleep = sleep
        self._stamps: deque[float] = deque()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock()
                while self._stamps and now - self._stamps[0] >= self.window:
                    self._stamps.popleft()
                if len(self._stamps) < self.max_requests:
                    self._stamps.append(now)
                    return
                wait = self.window - (now - self._stamps[0])
            self._sleep(max(wait, 0.01))


class NvdClient:
    """Fetches and caches CVE records.

    ``offline=True`` restricts the client to cache hits and imported
    fixtures; any would-be network call raises NetworkError instead.
    Concurrent fetches of the same id share one request.
    """

    def __init__(
        self,
        cache_dir: Path | str,
        api_key: Optional[str] = None,
        base_url: str = DEFAULT_BASE_URL,
        ttl: timedelta = DEFAULT_TTL,
        rate_budget: Optional[tuple[int, float]] = None,
        offline: bool = False,
        http_client: Optional[httpx.Client] = None,
        now: Callable[[], datetime] = lambda: datetime.now(timezone.utc),
        monotonic: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self.api_key = api_key
        self.base_url = base_url
        self.ttl = ttl
        self.offline = offline
        self._now = now
        if rate_budget is None:
            rate_budget = KEYED_RATE_BUDGET if api_key else PUBLIC_RATE_BUDGET
        self._limiter = _RateLimiter(rate_budget, monotonic, sleep)
        self._http = http_client
        self._inflight: dict[str, threading.Event] = {}
        self._inflight_lock = threading.Lock()

    def _cache_path(self, cve_id: str) -> Path:
        return self.cache_dir / f"{cve_id}.json"

    def _read_cache(self, cve_id: str, ignore_ttl: bool = False) -> Optional[CveRecord]:
        path = self._cache_path(cve_id)
        if not path.exists():
            return None
        try:
            entry = json.loads(path.read_text())
            fetched_at = datetime.fromisoformat(entry["fetched_at"])
            source = Source(entry.get("source", Source.NVD.value))
        except (json.JSONDecodeError, KeyError, ValueError):
            return None
        if not ignore_ttl and self._now() - fetched_at > self.ttl:
            return None
        records = parse_api_response(entry["response"], source, fetched_at)
        return records[0] if records else None

    def _write_cache(self, cve_id: str, response: dict, source: Source) -> datetime:
        fetched_at = self._now()
        entry = {
            "fetched_at": fetched_at.isoformat(),
            "source": source.value,
            "response": response,
        }
        path = self._cache_path(cve_id)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(entry, indent=1))
        tmp.replace(path)
        return fetched_at

    def load_fixture(self, path: Path | str) -> list[CveRecord]:
        """Import a fixture file into the cache for offline serving."""
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise FileError(f"cannot read fixture {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise MalformedResponse(f"fixture {path} is not valid JSON: {exc}") from exc
        records = parse_api_response(data, Source.FIXTURE)
        for item in data["vulnerabilities"]:
            cve_id = canonical_cve_id(item["cve"]["id"])
            self._write_cache(cve_id, {"vulnerabilities": [item]}, Source.FIXTURE)
        return records

    def fetch_cve(self, cve_id: str, refresh: bool = False) -> CveRecord:
        """Return the record for one CVE, from cache within the TTL."""
        cve_id = canonical_cve_id(cve_id)
        if not refresh:
            cached = self._read_cache(cve_id, ignore_ttl=self.offline)
            if cached is not None:
                return cached
        if self.offline:
            cached = self._read_cache(cve_id, ignore_ttl=True)
            if cached is not None:
                return cached
            raise NetworkError(
                f"{cve_id} not in cache and client is offline"
            )

        with self._inflight_lock:
            event = self._inflight.get(cve_id)
            if event is None:
                event = threading.Event()
                self._inflight[cve_id] = event
                leader = True
            else:
                leader = False
        if not leader:
            event.wait()
            cached = self._read_cache(cve_id, ignore_ttl=True)
            if cached is not None:
                return cached
            raise NetworkError(f"concurrent fetch of {cve_id} failed")
        try:
            return self._fetch_live(cve_id)
        finally:
            with self._inflight_lock:
                del self._inflight[cve_id]
            event.set()

    def _fetch_live(self, cve_id: str) -> CveRecord:
        self._limiter.acquire()
        headers = {"apiKey": self.api_key} if self.api_key else {}
        client = self._http or httpx.Client(timeout=30.0)
        try:
            response = client.get(
                self.base_url, params={"cveId": cve_id}, headers=headers
            )
        except httpx.HTTPError as exc:
            raise NetworkError(f"NVD request failed: {exc}") from exc
        finally:
            if self._http is None:
                client.close()
        if response.status_code in (403, 429, 503):
            retry_after = float(response.headers.get("Retry-After", 30))
            raise RateLimited(
                f"NVD throttled the request ({response.status_code})", retry_after
            )
        if response.status_code != 200:
            raise NetworkError(f"NVD returned HTTP {response.status_code}")
        try:
            data = response.json()
        except ValueError as exc:
            raise MalformedResponse(f"NVD response is not JSON: {exc}") from exc
        records = parse_api_response(data, Source.NVD)
        if not records:
            raise NotFound(f"{cve_id} is not listed in the NVD")
        fetched_at = self._write_cache(
            cve_id, {"vulnerabilities": data["vulnerabilities"]}, Source.NVD
        )
        record = records[0]
        return CveRecord(
            cve_id=record.cve_id,
            description=record.description,
            references=record.references,
            cvss_vectors=record.cvss_vectors,
            source=Source.NVD,
            fetched_at=fetched_at,
        )
