"""Pass/fail verdicts over quantity series and surface reports.

Tolerances are deterministic functions of the resolution ``N`` and time
step ``dt``; nothing here is statistical.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

MACHINE_SCALE = 1e-12
MONOTONE_SAFETY = 10.0
INEQUALITY_C = 10.0
EQUALITY_TOL = 1e-8
GROWTH_TOL = 1e-3


@dataclass
class Verdict:
    name: str
    passed: bool
    worst_violation: float
    tolerance: float
    context: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: worst={self.worst_violation:.3e} tol={self.tolerance:.3e}"


def _verdict(name, worst, tol, **context):
    worst = float(worst)
    return Verdict(name, bool(worst <= tol), worst, float(tol),
                   {k: str(v) for k, v in context.items()})


def monotone_tolerance(N: int, dt: float, scale: float) -> float:
    """``10 (1e-12 + N^-4 + dt^4) |scale|``."""
    return MONOTONE_SAFETY * (MACHINE_SCALE + float(N) ** -4 + float(dt) ** 4) * abs(scale)


def inequality_tolerance(N: int, scale: float) -> float:
    return INEQUALITY_C * float(N) ** -4 * abs(scale)


def _values(series, column):
    if column is None:
        return np.asarray(series, dtype=float)
    return np.asarray(series[column], dtype=float)


def check_monotone(series, column, direction="nonincreasing", tol=0.0, name=None) -> Verdict:
    """Worst forward difference against ``direction``, clipped at zero."""
    values = _values(series, column)
    if values.size < 3:
        raise ValueError("monotonicity needs at least 3 samples")
    diffs = np.diff(values)
    if direction == "nonincreasing":
        worst = diffs.max()
    elif direction == "nondecreasing":
        worst = -diffs.min()
    else:
        raise ValueError(f"unknown direction {direction!r}")
    worst = max(0.0, float(worst))
    return _verdict(name or f"monotone:{column}", worst, tol, direction=direction)


def growth_rate(series, column, t_column="t") -> float:
    """Least-squares slope of ``log(column)`` over the middle 80% of samples."""
    t = np.asarray(series[t_column], dtype=float)
    y = np.log(_values(series, column))
    n = t.size
    lo, hi = int(math.floor(0.1 * n)), int(math.ceil(0.9 * n))
    if hi - lo < 2:
        lo, hi = 0, n
    slope, _ = np.polyfit(t[lo:hi], y[lo:hi], 1)
    return float(slope)


def convergence_order(values: dict, floor: float = 0.0) -> float:
    """Worst observed order of decay along a refinement ladder.

    ``values`` maps resolution to a non-negative error. A pair of rungs
    only yields an order when the finer error is above ``floor``; pairs that
    reach the floor are converged to round-off and carry no order
    information. With no measurable pair the result is ``inf``.
    """
    if len(values) < 3:
        raise ValueError("need at least three resolutions")
    items = sorted((int(n), abs(float(e))) for n, e in values.items())
    orders = [
        math.log(e0 / e1) / math.log(n1 / n0)
        for (n0, e0), (n1, e1) in zip(items, items[1:])
        if e1 > floor and e0 > 0
    ]
    return min(orders) if orders else math.inf


def equality_case(report, gap_label, tol=EQUALITY_TOL) -> Verdict:
    """Detect the equality case: vanishing relative gap on a round profile.

    ``passed`` means equality was detected.
    """
    flat = report.flat() if hasattr(report, "flat") else dict(report)
    gap = flat[gap_label]
    scale = flat.get(f"scale:{gap_label}", abs(gap)) or 1.0
    rel = abs(gap) / scale
    worst = max(rel, flat["roundness"] - 1.0)
    return _verdict(f"equality:{gap_label}", worst, tol, relative_gap=rel)


def nonnegative(name, value, tol, **context) -> Verdict:
    """Verdict for ``value >= -tol``."""
    return _verdict(name, max(0.0, -float(value)), tol, value=float(value), **context)


def bounded(name, value, tol, **context) -> Verdict:
    """Verdict for ``|value| <= tol``."""
    return _verdict(name, abs(float(value)), tol, **context)


def exp_weighted(series, column, rate) -> np.ndarray:
    t = np.asarray(series["t"], dtype=float)
    return np.exp(-rate * t) * _values(series, column)


def flow_checks(series, m: int, k: int, N: int, names=None) -> list[Verdict]:
    """Standard verdicts for one flow run; ``names`` defaults to every available check."""
    dt = float(np.max(series["dt"][1:])) if len(series) > 1 else 0.0
    available = available_flow_checks(m, k)
    names = list(available) if names is None else list(names)
    unknown = [n for n in names if n not in available]
    if unknown:
        raise KeyError(f"unknown checks for k={k}: {unknown}")
    out = []
    for name in names:
        kind, payload = available[name]
        if kind == "monotone":
            values, direction, scale = payload(series)
            tol = monotone_tolerance(N, dt, np.max(np.abs(scale)))
            out.append(check_monotone(values, None, direction, tol, name=name))
        else:
            column, expected = payload
            rate = growth_rate(series, column)
            out.append(_verdict(name, abs(rate - expected), GROWTH_TOL,
                                rate=rate, expected=expected))
    return out


def available_flow_checks(m: int, k: int) -> dict:
    """Check name -> (kind, payload) for a run with indices ``(m, k)``.

    Monotone payloads map a series to ``(values, direction, scale)``. The
    scale is the size of the terms being compared rather than of their
    difference, which may cancel to zero.
    """
    def q_k(s):
        prefactor = s["int_sigma_km1"] ** (-(m - k) / (m + 1 - k))
        terms = prefactor * np.maximum(np.abs(s["int_sigma_k_r2"]), np.abs(s["int_sigma_km2"]))
        return s[f"Q_{k}"], "nonincreasing", terms

    def decay_weighted(s):
        w = np.exp(-(m - k) * s["t"])
        return (w * (s["int_sigma_k_r2"] - s["int_sigma_km2"]), "nonincreasing",
                w * np.maximum(np.abs(s["int_sigma_k_r2"]), np.abs(s["int_sigma_km2"])))

    def q_1(s):
        # Q_1 = A^(-(m-1)/m) [int sigma_1 r^2 - (m+1) Vol]
        terms = s["area"] ** (-(m - 1) / m) * np.maximum(np.abs(s["int_sigma_k_r2"]),
                                                          (m + 1) * np.abs(s["volume"]))
        return s["Q_1"], "nonincreasing", terms

    def weighted(column, rate, direction):
        def payload(s):
            vals = exp_weighted(s, column, rate)
            return vals, direction, vals
        return payload

    checks = {}
    if k >= 2:
        checks[f"monotone_Q_{k}"] = ("monotone", q_k)
        checks["growth_bound_sigma_km2"] = (
            "monotone", weighted("int_sigma_km2", m - k + 2, "nondecreasing"))
        checks["decay_weighted_Q"] = ("monotone", decay_weighted)
    else:
        checks["monotone_Q_1"] = ("monotone", q_1)
    checks["monotone_guan_li"] = ("monotone", lambda s: (s["guan_li"], "nonincreasing", s["guan_li"]))
    checks["growth_bound_sigma_k"] = (
        "monotone", weighted("int_sigma_k", m - k, "nonincreasing"))
    checks["roundness_decreasing"] = (
        "monotone", lambda s: (s["roundness"] - 1.0, "nonincreasing", s["roundness"]))
    checks["growth_sigma_km1"] = ("growth", ("int_sigma_km1", m - k + 1))
    return checks


def verdicts_to_json(verdicts) -> str:
    return json.dumps([asdict(v) for v in verdicts], indent=1, sort_keys=True)


def verdicts_from_json(text) -> list[Verdict]:
    return [Verdict(**item) for item in json.loads(text)]


def exit_code(verdicts) -> int:
    return min(sum(not v.passed for v in verdicts), 125)


ALGEBRA_TOL = 1e-12


def identity_fuzz(samples: int = 10_000, m_max: int = 10, seed: int = 0) -> list[Verdict]:
    """Random-spectrum audit of the symmetric-function algebra.

    Errors are measured relative to the same expression evaluated on
    ``|kappa|``, which bounds the round-off of any summation order.
    """
    from .oracles import esp_bruteforce
    from .symmfunc import esp_table, newton_table, sigma_table

    rng = np.random.default_rng(seed)
    ms = rng.integers(1, m_max + 1, size=samples)
    worst = {"esp_oracle": 0.0, "trace_T": 0.0, "trace_TA": 0.0, "trace_TAA": 0.0,
             "newton_gap": 0.0}
    for m in range(1, m_max + 1):
        n = int(np.sum(ms == m))
        if n == 0:
            continue
        kap = rng.standard_normal((n, m)) * rng.uniform(0.1, 10.0, size=(n, 1))
        H = esp_table(kap)
        Habs = esp_table(np.abs(kap))
        for k in range(m + 1):
            err = np.abs(H[:, k] - esp_bruteforce(kap, k)) / Habs[:, k]
            worst["esp_oracle"] = max(worst["esp_oracle"], float(err.max()))
        Hx = np.concatenate([H, np.zeros((n, 1))], axis=1)
        Hax = np.concatenate([Habs, np.zeros((n, 1))], axis=1)
        for k in range(1, m + 1):
            lam = newton_table(kap, k - 1)
            lam_abs = newton_table(np.abs(kap), k - 1)
            checks = {
                "trace_T": (lam.sum(1), (m - k + 1) * H[:, k - 1], lam_abs.sum(1)),
                "trace_TA": ((lam * kap).sum(1), k * H[:, k], (lam_abs * np.abs(kap)).sum(1)),
                "trace_TAA": ((lam * kap**2).sum(1), H[:, k] * H[:, 1] - (k + 1) * Hx[:, k + 1],
                              Hax[:, k] * Hax[:, 1] + (k + 1) * Hax[:, k + 1]),
            }
            for name, (got, want, scale) in checks.items():
                worst[name] = max(worst[name], float((np.abs(got - want) / scale).max()))
        s, sa = sigma_table(kap), sigma_table(np.abs(kap))
        for i in range(1, m):
            gap = s[:, i] ** 2 - s[:, i - 1] * s[:, i + 1]
            rel = -gap / (sa[:, i] ** 2 + sa[:, i - 1] * sa[:, i + 1])
            worst["newton_gap"] = max(worst["newton_gap"], float(rel.max()))
    worst["newton_gap"] = max(0.0, worst["newton_gap"])
    return [_verdict(name, val, ALGEBRA_TOL, samples=samples, m_max=m_max, seed=seed)
            for name, val in worst.items()]
