"""NVD client: caching, rate limiting, fixtures, error mapping."""

import json
import threading
from datetime import datetime, timedelta, timezone

import httpx
import pytest

from goekit.nvd import (
    InvalidId,
    MalformedResponse,
    NetworkError,
    NotFound,
    NvdClient,
    RateLimited,
    Source,
    canonical_cve_id,
    import_fixture,
    parse_api_response,
)

from conftest import SAMPLE_CVES


def make_transport(handler):
    return httpx.Client(transport=httpx.MockTransport(handler), base_url="http://nvd.test")


def api_body(cve_id="CVE-2025-1156"):
    data = json.loads(SAMPLE_CVES.read_text())
    items = [i for i in data["vulnerabilities"] if i["cve"]["id"] == cve_id]
    return {"vulnerabilities": items}


class TestIds:
    def test_canonicalizes_case(self):
        assert canonical_cve_id(" cve-2025-1156 ") == "CVE-2025-1156"

    @pytest.mark.parametrize("bad", ["", "CVE-25-1156", "CVE-2025-1", "2025-1156", "CVE-2025-1156/x"])
    def test_rejects_bad_patterns(self, bad):
        with pytest.raises(InvalidId):
            canonical_cve_id(bad)


class TestParsing:
    def test_fixture_and_live_share_one_parser(self):
        records = parse_api_response(api_body(), Source.NVD)
        assert records[0].cve_id == "CVE-2025-1156"
        assert records[0].vector_for("3.1").startswith("CVSS:3.1/")
        assert records[0].vector_for("4.0").startswith("CVSS:4.0/")

    def test_primary_entry_preferred(self):
        body = api_body()
        metrics = body["vulnerabilities"][0]["cve"]["metrics"]
        secondary = {
            "source": "x",
            "type": "Secondary",
            "cvssData": {"version": "3.1", "vectorString": "CVSS:3.1/BOGUS"},
        }
        metrics["cvssMetricV31"].insert(0, secondary)
        records = parse_api_response(body, Source.NVD)
        assert "BOGUS" not in records[0].vector_for("3.1")

    def test_malformed_payload(self):
        with pytest.raises(MalformedResponse):
            parse_api_response({"nope": []}, Source.NVD)
        with pytest.raises(MalformedResponse):
            parse_api_response({"vulnerabilities": [{"cve": {}}]}, Source.NVD)

    def test_import_fixture_file(self):
        records = import_fixture(SAMPLE_CVES)
        assert {r.cve_id for r in records} == {"CVE-2025-1156", "CVE-2024-30384"}
        assert all(r.source is Source.FIXTURE for r in records)


class TestCache:
    def test_live_fetch_then_cache_hit(self, tmp_path):
        calls = []

        def handler(request):
            calls.append(request.url.params["cveId"])
            return httpx.Response(200, json=api_body())

        client = NvdClient(
            cache_dir=tmp_path,
            base_url="http://nvd.test/cves",
            http_client=make_transport(handler),
            rate_budget=(100, 1.0),
        )
        first = client.fetch_cve("CVE-2025-1156")
        second = client.fetch_cve("CVE-2025-1156")
        assert calls == ["CVE-2025-1156"]
        assert first.description == second.description
        assert second.source is Source.NVD

    def test_refresh_bypasses_cache(self, tmp_path):
        calls = []

        def handler(request):
            calls.append(1)
            return httpx.Response(200, json=api_body())

        client = NvdClient(
            cache_dir=tmp_path,
            base_url="http://nvd.test/cves",
            http_client=make_transport(handler),
            rate_budget=(100, 1.0),
        )
        client.fetch_cve("CVE-2025-1156")
        client.fetch_cve("CVE-2025-1156", refresh=True)
        assert len(calls) == 2

    def test_ttl_expiry_triggers_refetch(self, tmp_path):
        calls = []
        clock = {"now": datetime(2026, 1, 1, tzinfo=timezone.utc)}

        def handler(request):
            calls.append(1)
            return httpx.Response(200, json=api_body())

        client = NvdClient(
            cache_dir=tmp_path,
            base_url="http://nvd.test/cves",
            http_client=make_transport(handler),
            rate_budget=(100, 1.0),
            ttl=timedelta(hours=1),
            now=lambda: clock["now"],
        )
        client.fetch_cve("CVE-2025-1156")
        clock["now"] += timedelta(hours=2)
        client.fetch_cve("CVE-2025-1156")
        assert len(calls) == 2

    def test_offline_serves_stale_cache_and_fails_on_miss(self, tmp_path):
        client = NvdClient(cache_dir=tmp_path, offline=True)
        client.load_fixture(SAMPLE_CVES)
        record = client.fetch_cve("CVE-2024-30384")
        assert record.source is Source.FIXTURE
        with pytest.raises(NetworkError):
            client.fetch_cve("CVE-1999-0001")


class TestErrors:
    def _client(self, tmp_path, handler):
        return NvdClient(
            cache_dir=tmp_path,
            base_url="http://nvd.test/cves",
            http_client=make_transport(handler),
            rate_budget=(100, 1.0),
        )

    def test_empty_result_is_not_found(self, tmp_path):
        client = self._client(
            tmp_path, lambda r: httpx.Response(200, json={"vulnerabilities": []})
        )
        with pytest.raises(NotFound):
            client.fetch_cve("CVE-1999-0001")

    @pytest.mark.parametrize("status", [403, 429, 503])
    def test_throttle_statuses(self, tmp_path, status):
        client = self._client(
            tmp_path,
            lambda r: httpx.Response(status, headers={"Retry-After": "7"}),
        )
        with pytest.raises(RateLimited) as excinfo:
            client.fetch_cve("CVE-1999-0001")
        assert excinfo.value.retry_after == 7.0

    def test_http_error_maps_to_network_error(self, tmp_path):
        client = self._client(tmp_path, lambda r: httpx.Response(500))
        with pytest.raises(NetworkError):
            client.fetch_cve("CVE-1999-0001")

    def test_non_json_body(self, tmp_path):
        client = self._client(tmp_path, lambda r: httpx.Response(200, text="<html>"))
        with pytest.raises(MalformedResponse):
            client.fetch_cve("CVE-1999-0001")


class TestRateLimiter:
    def test_budget_never_exceeded_in_window(self, tmp_path):
        stamps = []
        clock = {"t": 0.0}

        def handler(request):
            stamps.append(clock["t"])
            return httpx.Response(200, json=api_body())

        client = NvdClient(
            cache_dir=tmp_path,
            base_url="http://nvd.test/cves",
            http_client=make_transport(handler),
            rate_budget=(2, 30.0),
            monotonic=lambda: clock["t"],
            sleep=lambda s: clock.__setitem__("t", clock["t"] + s),
        )
        for _ in range(5):
            client.fetch_cve("CVE-2025-1156", refresh=True)
        for left, right in zip(stamps, stamps[2:]):
            assert right - left >= 30.0

    def test_concurrent_fetch_shares_one_request(self, tmp_path):
        calls = []
        gate = threading.Event()

        def handler(request):
            calls.append(1)
            gate.wait(timeout=5)
            return httpx.Response(200, json=api_body())

        client = NvdClient(
            cache_dir=tmp_path,
            base_url="http://nvd.test/cves",
            http_client=make_transport(handler),
            rate_budget=(100, 1.0),
        )
        results = []
        threads = [
            threading.Thread(
                target=lambda: results.append(client.fetch_cve("CVE-2025-1156"))
            )
            for _ in range(4)
        ]
        for t in threads:
            t.start()
        gate.set()
        for t in threads:
            t.join(timeout=10)
        assert len(calls) == 1
        assert len(results) == 4
        assert {r.cve_id for r in results} == {"CVE-2025-1156"}
