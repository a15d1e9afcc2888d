import json
from dataclasses import replace

import pytest

from projdyn.calibration import (
    CalibrationError,
    ProjectMetrics,
    calibrate,
    effective_effort,
    effective_schedule,
    loc_per_task,
    motivation_comm_multiplier,
    nominal_potential_productivity,
    realized_dev_productivity,
)
from projdyn.scenario import DATA_DIR


@pytest.fixture(scope="module")
def metrics():
    return ProjectMetrics.load(DATA_DIR / "acbs_metrics.json")


def test_effective_effort(metrics):
    assert effective_effort(metrics) == 630
    assert effective_effort(replace(metrics, effort_deductions={})) == 780


def test_deductions_exhausting_total_rejected(metrics):
    with pytest.raises(CalibrationError) as exc:
        effective_effort(replace(metrics, effort_deductions={"all": 780}))
    assert exc.value.field == "effort_deductions"


def test_effective_schedule(metrics):
    assert effective_schedule(metrics) == 90
    assert effective_schedule(replace(metrics, schedule_deductions={})) == 170
    calendar = replace(metrics, estimated_total_schedule=325, schedule_deductions={"excluded": 80})
    assert effective_schedule(calendar) == 245


def test_realized_productivity(metrics):
    assert realized_dev_productivity(metrics) == pytest.approx(9985 / (0.7 * 2452))
    assert realized_dev_productivity(metrics) == pytest.approx(5.82, abs=0.01)
    flat = replace(metrics, delivered_loc=1000, actual_total_effort=100, testing_fraction=0)
    assert realized_dev_productivity(flat) == 10.0


def test_realized_productivity_needs_development_share(metrics):
    with pytest.raises(CalibrationError):
        realized_dev_productivity(replace(metrics, testing_fraction=1.0))


@pytest.mark.parametrize("f, c, expected", [(0.7, 0.03, 0.679), (1.0, 0.0, 1.0), (0.5, 0.5, 0.25)])
def test_motivation_comm_multiplier(f, c, expected):
    assert motivation_comm_multiplier(f, c) == pytest.approx(expected, abs=1e-15)


def test_nominal_potential_productivity():
    assert nominal_potential_productivity(5.82, 0.679, 0.75, 0.58) == pytest.approx(19.70, abs=0.05)
    assert nominal_potential_productivity(5.82, 1, 1, 1) == 5.82
    npp = nominal_potential_productivity(7.3, 0.4, 0.9, 0.35)
    assert npp * 0.4 * 0.9 * 0.35 == pytest.approx(7.3, rel=1e-9)


def test_nominal_potential_productivity_rejects_zero_multiplier():
    with pytest.raises(CalibrationError):
        nominal_potential_productivity(5.0, 0.0, 1.0, 1.0)


def test_loc_per_task(metrics):
    assert loc_per_task(metrics) == pytest.approx(19.70, abs=0.01)
    assert loc_per_task(replace(metrics, sim_loc_reference=100, sim_tasks_reference=10)) == 10
    assert loc_per_task(replace(metrics, sim_loc_reference=0)) == 0


def test_calibrate_acbs(metrics):
    p = calibrate(metrics).parameters
    assert p.initial_size_loc == 7572
    assert (p.effort_estimate, p.schedule_estimate, p.initial_workforce) == (630, 90, 3)
    assert p.nominal_potential_productivity == pytest.approx(19.70, abs=0.05)
    assert p.loc_per_task == pytest.approx(19.70, abs=0.01)


def test_calibration_round_trip(metrics):
    p = calibrate(metrics).parameters
    realized = (p.nominal_potential_productivity * 0.7 * (1 - 0.03)
                * p.complexity_multiplier * p.user_involvement_multiplier)
    assert realized == pytest.approx(realized_dev_productivity(metrics), abs=1e-6)


def test_trace_shows_deduction_arithmetic(metrics):
    trace = {e.name: e for e in calibrate(metrics).trace}
    assert trace["effort_estimate"].formula == "780 − 150 = 630"
    assert trace["schedule_estimate"].formula == "170 − 80 = 90"
    assert trace["motivation_comm_multiplier"].value == pytest.approx(0.679)


def test_trace_values_recompute_from_formulas(metrics):
    for e in calibrate(metrics).trace:
        rhs = e.formula.rsplit("=", 1)[1]
        assert float(rhs) == pytest.approx(e.value, rel=1e-5)


def test_calibrate_rejects_exhausting_deductions(metrics):
    with pytest.raises(CalibrationError) as exc:
        calibrate(replace(metrics, effort_deductions={"x": 800}))
    assert "effort_deductions" in str(exc.value)


def test_metrics_validation():
    raw = json.loads((DATA_DIR / "acbs_metrics.json").read_text())
    with pytest.raises(CalibrationError) as exc:
        ProjectMetrics.from_dict({k: v for k, v in raw.items() if k != "delivered_loc"})
    assert exc.value.field == "delivered_loc"
    with pytest.raises(CalibrationError):
        ProjectMetrics.from_dict({**raw, "bogus": 1})
    with pytest.raises(CalibrationError):
        ProjectMetrics.from_dict({**raw, "delivered_loc": -1})
    with pytest.raises(CalibrationError):
        ProjectMetrics.from_dict({**raw, "delivered_loc": "many"})
