"""Shared fixtures, plus a guard that fails any test touching the network."""

import socket
from datetime import datetime, timezone
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"
SAMPLE_CVES = FIXTURES / "nvd_sample_cves.json"

_LOCAL_HOSTS = {"localhost", "127.0.0.1", "::1", ""}

# filled by tests/test_acceptance.py, echoed after the run
acceptance_results = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    for line in acceptance_results:
        terminalreporter.write_line(line)


class NetworkBlockedError(AssertionError):
    pass


@pytest.fixture(autouse=True)
def no_network(monkeypatch):
    """Abort any attempt to open a non-loopback socket connection."""
    real_connect = socket.socket.connect

    def guarded_connect(self, address):
        host = address[0] if isinstance(address, tuple) else str(address)
        if host not in _LOCAL_HOSTS:
            raise NetworkBlockedError(f"test tried to reach {address!r}")
        return real_connect(self, address)

    monkeypatch.setattr(socket.socket, "connect", guarded_connect)


@pytest.fixture
def fixed_now():
    stamp = datetime(2026, 1, 1, tzinfo=timezone.utc)
    return lambda: stamp


@pytest.fixture
def offline_client(tmp_path, fixed_now):
    """NvdClient preloaded with the bundled sample CVEs, no network allowed."""
    from goekit.nvd import NvdClient

    client = NvdClient(cache_dir=tmp_path / "cache", offline=True, now=fixed_now)
    client.load_fixture(SAMPLE_CVES)
    return client
