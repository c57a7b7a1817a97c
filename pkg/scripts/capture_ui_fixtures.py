"""Capture real service responses as fixtures for the frontend tests.

Drives the HTTP API through the first worked example plus a second
assessment, then freezes the session view, finalize record and ranking
under frontend/test/fixtures/. Rerun after API changes.
"""

import json
import tempfile
from datetime import datetime, timezone
from pathlib import Path

from fastapi.testclient import TestClient

from goekit.service import ServiceConfig, create_app

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "frontend" / "test" / "fixtures"
SAMPLE_CVES = ROOT / "tests" / "fixtures" / "nvd_sample_cves.json"


def drive(client, cve_id, steps):
    response = client.post(
        "/api/v1/sessions", json={"cve_id": cve_id, "analyst": "alice"}
    )
    assert response.status_code == 201, response.text
    session_id = response.json()["session_id"]
    for number, plan in enumerate(steps, start=1):
        if plan == "skip":
            assert (
                client.post(
                    f"/api/v1/sessions/{session_id}/steps/{number}/skip"
                ).status_code
                == 200
            )
            continue
        criteria = iter(("AT", "TAI", "G"))
        for value in plan:
            response = client.post(
                f"/api/v1/sessions/{session_id}/steps/{number}/answer",
                json={"criterion": next(criteria), "value": value},
            )
            assert response.status_code == 200, response.text
    return session_id


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    store = Path(tempfile.mkdtemp())
    config = ServiceConfig(
        store_path=store,
        offline=True,
        fixture_paths=(SAMPLE_CVES,),
        now=lambda: datetime(2026, 1, 1, tzinfo=timezone.utc),
    )
    client = TestClient(create_app(config))

    sid = drive(client, "CVE-2025-1156", ["HHN", "N", "N", "skip"])
    session_view = client.get(f"/api/v1/sessions/{sid}").json()
    # the captured id would change on every run; pin it
    session_view["session_id"] = "fixture-session"
    record = client.post(f"/api/v1/sessions/{sid}/finalize").json()

    sid2 = drive(client, "CVE-2024-30384", ["HHH", "skip", "skip", "skip"])
    record2 = client.post(f"/api/v1/sessions/{sid2}/finalize").json()
    ranking = client.get("/api/v1/rank").json()

    for name, payload in (
        ("session_example1.json", session_view),
        ("record_example1.json", record),
        ("record_example2.json", record2),
        ("ranking.json", ranking),
    ):
        (OUT / name).write_text(json.dumps(payload, indent=1) + "\n")
        print("wrote", OUT / name)


if __name__ == "__main__":
    main()
