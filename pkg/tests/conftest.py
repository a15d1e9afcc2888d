from dataclasses import replace

import pytest

from projdyn.calibration import ProjectMetrics, calibrate
from projdyn.model import PolicyParams, init_state
from projdyn.scenario import ACBS_SCENARIO, DATA_DIR, load_scenario

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""

    def record(criterion: str, checks: dict[str, bool], detail: str = "") -> bool:
        ok = all(checks.values())
        failed = [k for k, v in checks.items() if not v]
        note = detail + (f" | failed: {', '.join(failed)}" if failed else "")
        _ACCEPTANCE.append((criterion, ok, note))
        print(f"{'PASS' if ok else 'FAIL'} {criterion}: {note}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, note in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {criterion}: {note}")


@pytest.fixture(scope="session")
def acbs_calibration():
    return calibrate(ProjectMetrics.load(DATA_DIR / "acbs_metrics.json"))


@pytest.fixture(scope="session")
def acbs_params(acbs_calibration):
    return acbs_calibration.parameters


@pytest.fixture
def policy():
    return PolicyParams()


@pytest.fixture(scope="session")
def acbs_scenario():
    return load_scenario(ACBS_SCENARIO)


@pytest.fixture
def make_state(acbs_params):
    """Initial ACBS state with selected fields overridden."""

    def make(params=None, policy=None, **kw):
        return replace(init_state(params or acbs_params, policy or PolicyParams()), **kw)

    return make
