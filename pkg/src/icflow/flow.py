"""Inverse curvature flow of radial profiles.

The normal speed ``F = sigma_{k-1} / sigma_k`` moves the radial graph by
``d rho / dt = F w / rho`` since ``<nu, e_r> = rho / w``. Time stepping is the
classical four-stage Runge-Kutta method on the nodal values of ``rho``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from math import comb

import numpy as np

from . import functionals as fn
from .exceptions import FlowBreakdown
from .geometry import RadialProfile, point_frames, roundness, spectra, spectral_filter
from .symmfunc import newton_table, sigma_table

C_STAB = 0.4
MAX_REJECTIONS = 10


@dataclass(frozen=True)
class FlowState:
    profile: RadialProfile
    t: float = 0.0
    k: int = 1
    step_count: int = 0
    last_dt: float = 0.0

    def __post_init__(self):
        if not 1 <= self.k <= self.profile.m:
            raise ValueError(f"flow index k must lie in [1, {self.profile.m}], got {self.k}")


def _speed_terms(profile: RadialProfile, k: int):
    frame = point_frames(profile)
    kap = spectra(frame)
    sig = sigma_table(kap)
    bad = np.flatnonzero(~(sig[:, k] > 0))
    if bad.size:
        raise FlowBreakdown(f"sigma_{k} <= 0 at node {bad[0]}", node=int(bad[0]))
    return frame, kap, sig


def rhs(state: FlowState) -> np.ndarray:
    """``d rho / dt`` at every node."""
    frame, _, sig = _speed_terms(state.profile, state.k)
    speed = sig[:, state.k - 1] / sig[:, state.k]
    return speed * frame.w / frame.rho


def diffusion_coefficient(state: FlowState) -> np.ndarray:
    """Per-node coefficient of the second-order part of the linearized speed.

    Sums ``|dF/dkappa_j|`` over all m principal directions; the parallel
    directions enter through ``cot(theta) rho'``, which acts like ``rho''``
    near the poles.
    """
    m, k = state.profile.m, state.k
    frame, kap, sig = _speed_terms(state.profile, k)

    def dsigma(q):
        if q == 0:
            return np.zeros_like(kap)
        return newton_table(kap, q - 1) / comb(m, q)

    num, den = sig[:, k - 1 : k], sig[:, k : k + 1]
    dF = (dsigma(k - 1) * den - num * dsigma(k)) / den**2
    mer = np.abs(dF[:, 0]) / frame.w**2
    par = np.abs(dF[:, 1:]).sum(axis=1) / frame.rho**2
    return mer + par


def dt_max(state: FlowState, c_stab: float = C_STAB) -> float:
    N = state.profile.N
    return c_stab * (math.pi / N) ** 2 / float(diffusion_coefficient(state).max())


def _rk4(profile: RadialProfile, k: int, dt: float) -> RadialProfile:
    def f(p):
        return rhs(FlowState(p, 0.0, k))

    def shifted(p, incr):
        try:
            return p.with_rho(p.rho + incr)
        except ValueError as exc:  # rho lost positivity
            raise FlowBreakdown(str(exc)) from exc

    k1 = f(profile)
    k2 = f(shifted(profile, 0.5 * dt * k1))
    k3 = f(shifted(profile, 0.5 * dt * k2))
    k4 = f(shifted(profile, dt * k3))
    rho = profile.rho + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return shifted(profile, spectral_filter(rho) - profile.rho)


def step(state: FlowState, dt: float) -> FlowState:
    """Advance by ``dt``, halving on positivity loss up to 10 times.

    The returned state may have advanced by less than ``dt``; ``last_dt``
    records the step actually taken.
    """
    trial = dt
    for _ in range(MAX_REJECTIONS + 1):
        try:
            profile = _rk4(state.profile, state.k, trial)
            _speed_terms(profile, state.k)
        except FlowBreakdown:
            trial *= 0.5
            continue
        return replace(state, profile=profile, t=state.t + trial,
                       step_count=state.step_count + 1, last_dt=trial)
    raise FlowBreakdown(
        f"sigma_{state.k} positivity lost at t={state.t:.6g} after {MAX_REJECTIONS} step halvings",
        state=state,
    )


def rescaled(profile: RadialProfile, t: float) -> RadialProfile:
    """The profile scaled by ``exp(-t)``, origin offset included."""
    return profile.scaled(math.exp(-t))


def series_columns(k: int) -> list[str]:
    cols = ["t"]
    if k >= 2:
        cols.append("int_sigma_km2")
    cols += ["int_sigma_km1", "int_sigma_k", "int_sigma_k_r2"]
    cols.append(f"Q_{k}" if k >= 2 else "Q_1")
    cols += ["guan_li", "volume", "area", "roundness", "hm_residual_max", "dt"]
    return cols


SERIES_HELP = """\
series.csv columns (frozen, append-only):
  t                flow time
  int_sigma_km2    int sigma_{k-2} dmu (k >= 2 only)
  int_sigma_km1    int sigma_{k-1} dmu
  int_sigma_k      int sigma_k dmu
  int_sigma_k_r2   int sigma_k r^2 dmu, r measured from O
  Q_<k> / Q_1      monotone quantity (Q_k for k >= 2, Q_1 for k = 1)
  guan_li          (int sigma_{k-1})^(-(m-k)/(m+1-k)) int sigma_k
  volume           enclosed volume
  area             surface area
  roundness        max(rho) / min(rho)
  hm_residual_max  max_j |Hsiung-Minkowski residual_j| / int sigma_{j-1}
  dt               largest accepted time step since the previous row"""


class QuantitySeries:
    """Time-ordered rows of tracked quantities."""

    def __init__(self, columns, rows=None, meta=None):
        self.columns = list(columns)
        self.rows = [list(r) for r in (rows or [])]
        self.meta = dict(meta or {})

    def __len__(self):
        return len(self.rows)

    def append(self, row: dict):
        if self.rows and not row["t"] > self.rows[-1][0]:
            raise ValueError("series times must be strictly increasing")
        self.rows.append([float(row[c]) for c in self.columns])

    def column(self, name) -> np.ndarray:
        idx = self.columns.index(name)
        return np.array([r[idx] for r in self.rows])

    def __getitem__(self, name):
        return self.column(name)

    def __contains__(self, name):
        return name in self.columns

    def last(self) -> dict:
        return dict(zip(self.columns, self.rows[-1]))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        for key in sorted(self.meta):
            buf.write(f"# {key}={self.meta[key]}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([f"{v:.17g}" for v in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, path) -> "QuantitySeries":
        meta, lines = {}, []
        with open(path) as fh:
            for line in fh:
                if line.startswith("#"):
                    key, _, val = line[1:].strip().partition("=")
                    meta[key] = val
                else:
                    lines.append(line)
        reader = csv.reader(lines)
        columns = next(reader)
        rows = [[float(v) for v in r] for r in reader if r]
        return cls(columns, rows, meta)


def record(state: FlowState) -> dict:
    surf = fn.evaluate(state.profile)
    m, k = surf.m, state.k
    row = {"t": state.t, "dt": state.last_dt}
    if k >= 2:
        row["int_sigma_km2"] = fn.weighted_integral(surf, k - 2)
        row[f"Q_{k}"] = fn.q_k(surf, k)
    else:
        row["Q_1"] = fn.q1(surf)
    row["int_sigma_km1"] = fn.weighted_integral(surf, k - 1)
    row["int_sigma_k"] = fn.weighted_integral(surf, k)
    row["int_sigma_k_r2"] = fn.weighted_integral(surf, k, 2.0)
    row["guan_li"] = fn.guan_li(surf, k)
    row["volume"] = fn.volume(surf)
    row["area"] = fn.area(surf)
    row["roundness"] = roundness(state.profile)
    row["hm_residual_max"] = max(
        abs(fn.hsiung_minkowski_residual(surf, j)) / abs(fn.weighted_integral(surf, j - 1))
        for j in range(1, m + 1)
    )
    return row


def run(state: FlowState, t_end: float, sample_every: float, c_stab: float = C_STAB):
    """Integrate to ``t_end`` recording a row every ``sample_every``.

    Returns ``(series, final_state)``. On breakdown the raised
    ``FlowBreakdown`` carries the partial series and last good state.
    """
    if not t_end > state.t:
        raise ValueError("t_end must exceed the current time")
    if not sample_every > 0:
        raise ValueError("sample_every must be positive")
    prof = state.profile
    series = QuantitySeries(series_columns(state.k),
                            meta={"m": prof.m, "k": state.k, "N": prof.N, "d": f"{prof.d:.17g}"})
    t0 = state.t
    n_samples = max(1, int(math.floor((t_end - t0) / sample_every + 1e-9)))
    targets = [t0 + sample_every * (i + 1) for i in range(n_samples)]
    if targets[-1] < t_end - 1e-12:
        targets.append(t_end)
    targets[-1] = t_end
    try:
        _speed_terms(state.profile, state.k)
        series.append(record(state))
        for target in targets:
            largest = 0.0
            while state.t < target:
                remaining = target - state.t
                dt = min(dt_max(state, c_stab), remaining)
                state = step(state, dt)
                largest = max(largest, state.last_dt)
                if target - state.t < 1e-12 * max(1.0, abs(target)):
                    state = replace(state, t=target)
            row = record(state)
            row["dt"] = largest
            series.append(row)
    except FlowBreakdown as exc:
        exc.series = series
        if exc.state is None:
            exc.state = state
        raise
    return series, state
