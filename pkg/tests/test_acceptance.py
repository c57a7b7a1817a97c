"""Acceptance suite: one test per primary criterion, timed as stated.

Each test records a PASS line on success; the checklist is echoed at the
end of the pytest run. The whole suite runs offline; the network guard in conftest
fails any test that reaches for a non-loopback socket.
"""

import json
import random
import socket
import sys
import time

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from goekit import cvss
from goekit.cli import main as cli_main
from goekit.goe import overall_goe, parse_goe
from goekit.service import ServiceConfig, create_app
from goekit.store import AssessmentStore, rank

import conftest
from conftest import SAMPLE_CVES, NetworkBlockedError

EXAMPLE1_GOE = "GOE:1.0/R:AT:H,TAI:H,G:N/W:AT:N,TAI:N,G:N/D:AT:N,TAI:N,G:N/E:SKIP"
EXAMPLE2_GOE = "GOE:1.0/R:AT:H,TAI:H,G:H/W:SKIP/D:SKIP/E:SKIP"
NOW = "2026-01-01T00:00:00+00:00"


def report(name):
    line = f"[PRIMARY] {name}: PASS"
    print(line, file=sys.stderr)
    conftest.acceptance_results.append(line)


def run_assess(tmp_path, cve_id, transcript):
    answers = tmp_path / "transcript.txt"
    answers.write_text(transcript)
    runner = CliRunner()
    return runner.invoke(
        cli_main,
        [
            "--store", str(tmp_path / "store"), "--offline", "--format", "json",
            "assess", cve_id,
            "--answers", str(answers),
            "--fixture", str(SAMPLE_CVES),
            "--analyst", "analyst",
            "--now", NOW,
        ],
    )


def test_goe_worked_example_1(tmp_path):
    started = time.monotonic()
    result = run_assess(tmp_path, "CVE-2025-1156", "H H N\nN\nN\nskip\n")
    assert result.exit_code == 0, result.output
    record = json.loads(result.output)["record"]
    step_scores = [
        None if s["sub_vector"] is None
        else sum(1 for v in s["sub_vector"].values() if v == "H")
        for s in record["steps"]
    ]
    assert step_scores == [2, 0, 0, None]  # skip contributes infinity
    assert record["overall"] == 0
    assert record["goe_string"] == EXAMPLE1_GOE
    assert time.monotonic() - started < 1.0
    report("GOE worked example 1 (steps 2,0,0,skip; overall 0)")


def test_goe_worked_example_2(tmp_path):
    started = time.monotonic()
    result = run_assess(tmp_path, "CVE-2024-30384", "H H H skip skip skip")
    assert result.exit_code == 0, result.output
    record = json.loads(result.output)["record"]
    assert record["overall"] == 3
    assert record["goe_string"] == EXAMPLE2_GOE
    assert time.monotonic() - started < 1.0
    report("GOE worked example 2 (overall 3)")


def test_cvss_reproduction():
    started = time.monotonic()
    cases = [
        ("CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:L/I:L/A:L", 7.3, "High"),
        ("CVSS:3.1/AV:L/AC:L/PR:L/UI:N/S:U/C:N/I:N/A:H", 5.5, "Medium"),
        (
            "CVSS:4.0/AV:N/AC:L/AT:N/PR:N/UI:N/VC:L/VI:L/VA:L/SC:N/SI:N/SA:N",
            6.9,
            "Medium",
        ),
        (
            "CVSS:4.0/AV:L/AC:L/AT:N/PR:L/UI:N/VC:N/VI:N/VA:H/SC:N/SI:N/SA:L",
            6.8,
            "Medium",
        ),
    ]
    for text, value, band in cases:
        result = cvss.score(text)
        assert (result.value, result.severity.value) == (value, band), text
    assert time.monotonic() - started < 1.0
    report("CVSS reproduction (7.3 High, 5.5 Medium, 6.9 Medium, 6.8 Medium)")


def test_cvss_oracle_suite():
    started = time.monotonic()
    import test_cvss_oracle

    test_cvss_oracle.test_v31_oracle_suite()
    test_cvss_oracle.test_v40_oracle_suite()
    test_cvss_oracle.test_macrovector_table_integrity()
    assert time.monotonic() - started < 5.0
    report("CVSS oracle suite (250 vectors per version, exact)")


def test_property_suites():
    started = time.monotonic()
    import test_cvss
    import test_goe
    import test_goe_grammar
    import test_store

    test_goe.TestLeaves().test_exactly_four_of_eight_triples_are_leaves()
    test_goe.test_property_overall_matches_min_with_skip_infinity()
    test_goe.test_property_overall_monotone_under_score_decrease()
    test_goe.test_property_combine_models_is_brute_force_min()
    test_goe.test_property_traversal_score_equals_sum()
    for leaf in test_goe.VALID_LEAVES:
        test_goe.TestTraversal().test_traversal_reproduces_every_leaf(leaf)
    test_goe_grammar.test_property_round_trip()
    test_cvss.test_property_v31_round_trip_and_range()
    test_cvss.test_property_v40_round_trip_and_range()
    test_store.test_property_rank_key_total_order()
    test_store.test_property_rank_permutation_invariant()
    assert time.monotonic() - started < 30.0
    report("property suites (leaves, aggregation, grammar, ranking)")


def test_api_fuzz(tmp_path):
    started = time.monotonic()
    app = create_app(
        ServiceConfig(
            store_path=tmp_path / "store",
            offline=True,
            fixture_paths=(SAMPLE_CVES,),
        )
    )
    client = TestClient(app, raise_server_exceptions=False)
    rng = random.Random(0x5EED)
    cve_ids = ["CVE-2025-1156", "CVE-2024-30384"]
    sessions: list[str] = []
    finalized_bodies: dict[str, dict] = {}
    requests = 0

    def call(method, url, **kwargs):
        nonlocal requests
        requests += 1
        response = client.request(method, url, **kwargs)
        assert response.status_code < 500, (
            f"{method} {url} -> {response.status_code}: {response.text}"
        )
        return response

    for _ in range(10_000):
        if sessions and rng.random() < 0.9:
            session_id = rng.choice(sessions)
        else:
            response = call(
                "POST",
                "/api/v1/sessions",
                json={"cve_id": rng.choice(cve_ids), "analyst": "fuzz"},
            )
            session_id = response.json()["session_id"]
            sessions.append(session_id)
            if len(sessions) > 40:
                sessions.pop(0)
            if rng.random() < 0.2:
                # drive this one to a random complete state, then check
                # that finalizing twice returns the same record
                for step in (1, 2, 3, 4):
                    choice = rng.randint(0, 4)
                    if choice == 4:
                        call(
                            "POST",
                            f"/api/v1/sessions/{session_id}/steps/{step}/skip",
                        )
                        continue
                    values = ("H" * choice + "N")[:3]
                    for criterion, value in zip(("AT", "TAI", "G"), values):
                        call(
                            "POST",
                            f"/api/v1/sessions/{session_id}/steps/{step}/answer",
                            json={"criterion": criterion, "value": value},
                        )
                first = call("POST", f"/api/v1/sessions/{session_id}/finalize")
                assert first.status_code == 200, first.text
                finalized_bodies[session_id] = first.json()
                second = call("POST", f"/api/v1/sessions/{session_id}/finalize")
                assert second.json() == first.json(), "finalize is not idempotent"
        for _ in range(rng.randint(0, 1)):
            roll = rng.random()
            if roll < 0.45:
                call(
                    "POST",
                    f"/api/v1/sessions/{session_id}/steps/{rng.randint(0, 5)}/answer",
                    json={
                        "criterion": rng.choice(["AT", "TAI", "G"]),
                        "value": rng.choice(["N", "H"]),
                        "rationale": "",
                    },
                )
            elif roll < 0.7:
                call(
                    "POST",
                    f"/api/v1/sessions/{session_id}/steps/{rng.randint(0, 5)}/skip",
                )
            elif roll < 0.85:
                response = call("POST", f"/api/v1/sessions/{session_id}/finalize")
                if response.status_code == 200:
                    body = response.json()
                    previous = finalized_bodies.setdefault(session_id, body)
                    assert body == previous, "finalize is not idempotent"
            else:
                call("GET", f"/api/v1/sessions/{session_id}")

    elapsed = time.monotonic() - started
    assert elapsed < 60.0, f"fuzz took {elapsed:.1f}s over {requests} requests"

    # every stored record still satisfies the scoring invariants
    store = AssessmentStore(tmp_path / "store")
    checked = 0
    for cve_id in cve_ids:
        for revision in store.revisions(cve_id):
            record = store.load(cve_id, revision)
            assert record.overall == overall_goe(record.assessment)
            parsed = parse_goe(
                json.loads(
                    (tmp_path / "store" / cve_id / f"{revision:06d}.json").read_text()
                )["goe_string"]
            )
            assert [s.sub_vector for s in parsed.steps] == [
                s.sub_vector for s in record.assessment.steps
            ]
            checked += 1
    assert checked == len(finalized_bodies)
    report(
        f"API fuzz (10,000 sequences, {requests} requests, "
        f"{checked} records, {elapsed:.1f}s, no 5xx)"
    )


def test_ranking_reproduction(tmp_path):
    for cve_id, transcript in (
        ("CVE-2025-1156", "H H N N N skip"),
        ("CVE-2024-30384", "H H H skip skip skip"),
    ):
        result = run_assess(tmp_path, cve_id, transcript)
        assert result.exit_code == 0
    store = AssessmentStore(tmp_path / "store")
    entries = rank(store.query())
    assert [(e.cve_id, e.rank) for e in entries] == [
        ("CVE-2025-1156", 1),
        ("CVE-2024-30384", 2),
    ]
    assert entries[0].goe == 0 and entries[1].goe == 3
    report("ranking reproduction (CVE-2025-1156 above CVE-2024-30384)")


def test_offline_guarantee():
    """The guard that covers the whole suite rejects outbound sockets."""
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        with pytest.raises(NetworkBlockedError):
            probe.connect(("203.0.113.1", 443))
    finally:
        probe.close()
    report("offline guarantee (network guard active for the whole suite)")
