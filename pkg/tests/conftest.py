import os

import pytest
from hypothesis import HealthCheck, settings

from arterial_uq.network import load_network, sample_network_path

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def sample_net():
    return load_network(sample_network_path("sample_55"))


@pytest.fixture(scope="session")
def bif_net():
    return load_network(sample_network_path("aortic_bifurcation"))


# --- acceptance report ------------------------------------------------------------
# Each acceptance criterion records (passed, detail) per sub-check; the terminal
# summary prints one PASS/FAIL line per criterion.

ACCEPTANCE: dict = {}


@pytest.fixture(scope="session")
def acceptance():
    def record(criterion: int, part: str, passed: bool, detail: str = "") -> bool:
        ACCEPTANCE.setdefault(criterion, []).append((part, bool(passed), detail))
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[c]
        ok = all(p for _, p, _ in parts)
        failed = [name for name, p, _ in parts if not p]
        detail = "; ".join(f"{name}: {d}" if d else name for name, _, d in parts)
        suffix = f" [failed: {', '.join(failed)}]" if failed else ""
        terminalreporter.write_line(f"criterion {c:2d}: {'PASS' if ok else 'FAIL'}{suffix} | {detail}")
