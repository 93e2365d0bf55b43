import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from icflow import functionals as fn
from icflow.flow import FlowState, QuantitySeries, run
from icflow.geometry import make_profile
from icflow.verify import (
    Verdict,
    available_flow_checks,
    check_monotone,
    convergence_order,
    equality_case,
    exit_code,
    flow_checks,
    growth_rate,
    identity_fuzz,
    inequality_tolerance,
    monotone_tolerance,
    verdicts_from_json,
    verdicts_to_json,
)


def synthetic(t, **cols):
    series = QuantitySeries(["t", *cols])
    for i, ti in enumerate(t):
        series.append({"t": ti, **{name: vals[i] for name, vals in cols.items()}})
    return series


def test_check_monotone_examples():
    t = np.linspace(0, 1, 11)
    v = check_monotone(synthetic(t, x=np.full(11, 3.0)), "x")
    assert v.passed and v.worst_violation == 0.0
    v = check_monotone(synthetic(t, x=np.exp(2 * t)), "x", "nondecreasing")
    assert v.passed
    v = check_monotone(synthetic(t, x=np.exp(2 * t)), "x", "nonincreasing", tol=0.1)
    assert not v.passed and v.worst_violation == pytest.approx(np.diff(np.exp(2 * t)).max())
    with pytest.raises(ValueError):
        check_monotone(synthetic(t[:2], x=t[:2]), "x")
    with pytest.raises(ValueError):
        check_monotone(synthetic(t, x=t), "x", "sideways")


def test_check_monotone_tolerance_boundary():
    t = np.linspace(0, 1, 5)
    x = np.array([1.0, 0.9, 0.9 + 1e-9, 0.8, 0.7])
    assert check_monotone(synthetic(t, x=x), "x", tol=1e-9).passed
    assert not check_monotone(synthetic(t, x=x), "x", tol=0.9e-9).passed


@given(st.floats(-3, 3), st.floats(0.1, 5), st.integers(5, 60))
@settings(max_examples=50)
def test_growth_rate_exact_on_exponentials(rate, amp, n):
    t = np.linspace(0, 2, n)
    series = synthetic(t, y=amp * np.exp(rate * t))
    assert abs(growth_rate(series, "y") - rate) < 1e-12 * max(1, abs(rate)) + 1e-12


def test_growth_rate_ignores_edges():
    t = np.linspace(0, 1, 21)
    y = np.exp(1.5 * t)
    y[0] *= 10
    y[-1] *= 0.1
    assert growth_rate(synthetic(t, y=y), "y") == pytest.approx(1.5, abs=1e-12)


@pytest.mark.parametrize("m,k", [(2, 1), (3, 2)])
def test_growth_rates_on_sphere_run(m, k):
    series, _ = run(FlowState(make_profile("sphere", m, 32), k=k), 1.0, 0.1)
    assert growth_rate(series, "area") == pytest.approx(m, abs=1e-9)
    assert growth_rate(series, "volume") == pytest.approx(m + 1, abs=1e-9)
    assert growth_rate(series, "int_sigma_km1") == pytest.approx(m - k + 1, abs=1e-9)


def test_convergence_order_examples():
    assert convergence_order({32: 1e-2, 64: 2.5e-3, 128: 6.25e-4}) == pytest.approx(2.0, abs=1e-12)
    assert convergence_order({32: 0.0, 64: 0.0, 128: 0.0}) == math.inf
    # the worst pair wins
    assert convergence_order({32: 1e-2, 64: 1e-3, 128: 5e-4}) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        convergence_order({32: 1.0, 64: 0.5})


def test_convergence_order_floor():
    # the last rung has hit round-off and carries no order information
    errs = {32: 1e-4, 64: 2e-12, 128: 1e-12}
    assert convergence_order(errs) == pytest.approx(1.0)
    assert convergence_order(errs, floor=1e-12) == pytest.approx(math.log2(5e7))
    assert convergence_order({32: 1e-13, 64: 2e-13, 128: 1e-13}, floor=1e-12) == math.inf


def test_tolerances_shrink():
    assert monotone_tolerance(128, 1e-3, 1.0) < monotone_tolerance(64, 2e-3, 1.0)
    assert monotone_tolerance(64, 0.0, 2.0) == pytest.approx(20 * (1e-12 + 64.0**-4))
    assert inequality_tolerance(32, -3.0) == pytest.approx(30 * 32.0**-4)


def test_equality_case_examples():
    centered = fn.surface_report(make_profile("sphere", 2, 64), 2)
    assert equality_case(centered, "theorem2_k2_l0_p0").passed
    shifted = fn.surface_report(make_profile("sphere", 2, 64, d=0.3), 2)
    v = equality_case(shifted, "theorem2_k2_l0_p0")
    assert not v.passed
    assert shifted.gaps["theorem2_k2_l0_p0"] == pytest.approx(4 * math.pi * 0.09, rel=1e-12)
    spheroid = fn.surface_report(make_profile("spheroid", 2, 64, a=1, c=2), 2)
    for label in spheroid.gaps:
        assert not equality_case(spheroid, label).passed


def test_verdict_invariant_and_json():
    verdicts = [Verdict("a", True, 0.0, 1e-9, {"x": "1"}), Verdict("b", False, 2.0, 1.0)]
    text = verdicts_to_json(verdicts)
    assert verdicts_from_json(text) == verdicts
    assert verdicts[0].line().startswith("PASS a:")
    assert verdicts[1].line().startswith("FAIL b:")


def test_exit_code():
    ok = Verdict("ok", True, 0.0, 0.0)
    bad = Verdict("bad", False, 1.0, 0.0)
    assert exit_code([ok, ok]) == 0
    assert exit_code([ok, bad, bad]) == 2
    assert exit_code([bad] * 300) == 125


def test_available_checks_by_k():
    assert "monotone_Q_2" in available_flow_checks(3, 2)
    assert "monotone_Q_1" in available_flow_checks(3, 1)
    assert "growth_bound_sigma_km2" not in available_flow_checks(3, 1)


def test_flow_checks_replay_from_csv(tmp_path):
    series, _ = run(FlowState(make_profile("spheroid", 2, 32, a=1, c=1.3), k=2), 0.5, 0.05)
    first = flow_checks(series, 2, 2, 32)
    series.to_csv(tmp_path / "s.csv")
    again = flow_checks(QuantitySeries.from_csv(tmp_path / "s.csv"), 2, 2, 32)
    assert verdicts_to_json(first) == verdicts_to_json(again)
    assert all(v.passed for v in first)
    with pytest.raises(KeyError):
        flow_checks(series, 2, 2, 32, ["monotone_Q_1"])


def test_identity_fuzz_small():
    verdicts = identity_fuzz(samples=500, m_max=6, seed=3)
    assert {v.name for v in verdicts} == {"esp_oracle", "trace_T", "trace_TA", "trace_TAA", "newton_gap"}
    assert all(v.passed for v in verdicts)
