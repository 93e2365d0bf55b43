"""Integral quantities over a radial profile.

Every integral is ``int_Sigma (...) dmu`` with ``r`` the distance to the
evaluation point O, which sits on the symmetry axis at offset ``d`` from the
star center.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .exceptions import PositivityError, SingularWeightError
from .geometry import (
    PointFrame,
    RadialProfile,
    integrate,
    point_frames,
    pole_values,
    roundness,
    spectra,
    sphere_area,
)
from .symmfunc import newton_table, sigma_table


@dataclass(frozen=True, eq=False)
class Surface:
    """A profile with its frames and ``sigma_0..sigma_m`` table evaluated once."""

    profile: RadialProfile
    frame: PointFrame
    sigma: np.ndarray  # shape (N, m + 1)

    @property
    def m(self):
        return self.profile.m

    def integral(self, values) -> float:
        return integrate(self.frame, values)


def evaluate(profile) -> Surface:
    if isinstance(profile, Surface):
        return profile
    frame = point_frames(profile)
    return Surface(profile, frame, sigma_table(spectra(frame)))


def _require_positive(surf: Surface, k: int):
    bad = np.flatnonzero(surf.sigma[:, k] <= 0)
    if bad.size:
        raise PositivityError(k, int(bad[0]))


def _require_off_surface(surf: Surface):
    prof = surf.profile
    north, south = pole_values(prof)
    gap = min(abs(prof.d - north), abs(prof.d + south))
    if gap <= 1e-6 * prof.rho.mean():
        raise SingularWeightError(f"origin offset d={prof.d} lies on the surface")


def weighted_integral(profile, l: int, p: float = 0.0) -> float:
    """``int sigma_l r^p dmu``."""
    surf = evaluate(profile)
    if not 0 <= l <= surf.m:
        raise ValueError(f"l must lie in [0, {surf.m}], got {l}")
    if p < 0:
        raise ValueError("p must be non-negative")
    weight = surf.sigma[:, l]
    if p != 0:
        weight = weight * surf.frame.r_O**p
    return surf.integral(weight)


def area(profile) -> float:
    return weighted_integral(profile, 0, 0.0)


def volume(profile) -> float:
    """Enclosed volume, ``1/(m+1) int <Y, nu> dmu`` about the star center."""
    surf = evaluate(profile)
    return surf.integral(surf.frame.support) / (surf.m + 1)


def _check_k(m, k, lo):
    if not lo <= k <= m:
        raise ValueError(f"k must lie in [{lo}, {m}], got {k}")


def q_k(profile, k: int) -> float:
    surf = evaluate(profile)
    _check_k(surf.m, k, 2)
    _require_positive(surf, k)
    m = surf.m
    lower = weighted_integral(surf, k - 1)
    return lower ** (-(m - k) / (m + 1 - k)) * (
        weighted_integral(surf, k, 2.0) - weighted_integral(surf, k - 2)
    )


def guan_li(profile, k: int) -> float:
    surf = evaluate(profile)
    _check_k(surf.m, k, 1)
    _require_positive(surf, k)
    m = surf.m
    return weighted_integral(surf, k - 1) ** (-(m - k) / (m + 1 - k)) * weighted_integral(surf, k)


def q1(profile) -> float:
    """The inverse-mean-curvature-flow quantity, with the volume term standing in for sigma_{-1}."""
    surf = evaluate(profile)
    m = surf.m
    # (1/m) int H r^2 = int sigma_1 r^2
    bracket = weighted_integral(surf, 1, 2.0) - (m + 1) * volume(surf)
    return area(surf) ** (-(m - 1) / m) * bracket


def hsiung_minkowski_residual(profile, j: int) -> float:
    """``int sigma_{j-1} - int sigma_j <Y, nu>`` about the star center."""
    surf = evaluate(profile)
    _check_k(surf.m, j, 1)
    return surf.integral(surf.sigma[:, j - 1] - surf.sigma[:, j] * surf.frame.support)


def _ghm_terms(surf: Surface, l: int, p: float):
    m, fr = surf.m, surf.frame
    f = fr.r_O**p if p != 0 else np.ones(len(fr))
    lhs = surf.integral(f * surf.sigma[:, l])
    normal = surf.integral(f * surf.sigma[:, l + 1] * fr.support_O)
    if p == 0:
        tangential = 0.0
    else:
        # grad r^p = p r^(p-2) Y_par and Y_par points along the meridian, where
        # T_l acts by e_l of the m-1 parallel curvatures.
        lam_mer = comb(m - 1, l) * fr.kappa_par**l
        integrand = p * fr.r_O ** (p - 2.0) * lam_mer * fr.ytan_sq
        tangential = surf.integral(integrand) / ((m - l) * comb(m, l))
    return lhs, normal, tangential


def generalized_hm_residual(profile, l: int, p: float) -> float:
    """Residual of the r^p-weighted Hsiung-Minkowski identity about O.

    ``int r^p sigma_l - int r^p sigma_{l+1} <Y, nu> + c_l int <T_l grad r^p, Y_par>``
    with ``c_l = 1 / ((m - l) C(m, l))``.
    """
    surf = evaluate(profile)
    if not 0 <= l <= surf.m - 1:
        raise ValueError(f"l must lie in [0, {surf.m - 1}], got {l}")
    if p < 0:
        raise ValueError("p must be non-negative")
    if p != 0:
        _require_off_surface(surf)
    lhs, normal, tangential = _ghm_terms(surf, l, p)
    return lhs - normal + tangential


def theorem2_gap(profile, k: int, l: int, p: float) -> float:
    """``int sigma_k r^(p+k-l) - int sigma_l r^p``; non-negative when sigma_k > 0."""
    surf = evaluate(profile)
    _check_k(surf.m, k, 1)
    if not 0 <= l < k:
        raise ValueError(f"l must lie in [0, {k - 1}], got {l}")
    if p < 0:
        raise ValueError("p must be non-negative")
    _require_positive(surf, k)
    _require_off_surface(surf)
    return weighted_integral(surf, k, p + k - l) - weighted_integral(surf, l, p)


@dataclass(frozen=True)
class PositivityScan:
    sigma_positive_up_to: int
    newton_spectra_positive: bool


def positivity_scan(profile, k: int | None = None) -> PositivityScan:
    """Largest k* with sigma_1..sigma_k* > 0 at every node, and T_l positivity for l < k.

    ``k`` defaults to k*. The Newton check covers T_0..T_{k-1}.
    """
    surf = evaluate(profile)
    m = surf.m
    positive = np.all(surf.sigma[:, 1:] > 0, axis=0)
    kstar = m if positive.all() else int(np.argmin(positive))
    k = kstar if k is None else k
    kap = spectra(surf.frame)
    newton_ok = all(np.all(newton_table(kap, l) > 0) for l in range(min(k, m)))
    return PositivityScan(kstar, bool(newton_ok))


def ros_gap(profile) -> float:
    """``m int 1/H - (m+1) Vol``, with ``H = m sigma_1``."""
    surf = evaluate(profile)
    _require_positive(surf, 1)
    return surf.integral(1.0 / surf.sigma[:, 1]) - (surf.m + 1) * volume(surf)


def quermassintegral_gap(profile, k: int) -> float:
    surf = evaluate(profile)
    m = surf.m
    if not 1 <= k < m:
        raise ValueError(f"k must lie in [1, {m - 1}], got {k}")
    _require_positive(surf, k)
    om = sphere_area(m)
    upper = (weighted_integral(surf, k) / om) ** (1.0 / (m - k))
    lower = (weighted_integral(surf, k - 1) / om) ** (1.0 / (m + 1 - k))
    return upper - lower


def sigma_label(j, p):
    return f"sigma_{j}_r^{p:g}"


@dataclass
class SurfaceReport:
    m: int
    k: int
    integrals: dict = field(default_factory=dict)
    Q_k: float = math.nan
    guan_li: float = math.nan
    Q_1: float = math.nan
    volume: float = math.nan
    sigma_positive_up_to: int = 0
    newton_spectra_positive: bool = False
    residuals: dict = field(default_factory=dict)
    gaps: dict = field(default_factory=dict)
    scales: dict = field(default_factory=dict)
    roundness: float = math.nan
    d: float = 0.0
    N: int = 0

    def flat(self) -> dict:
        out = {
            "m": self.m, "k": self.k, "N": self.N, "d": self.d,
            "Q_k": self.Q_k, "Q_1": self.Q_1, "guan_li": self.guan_li, "volume": self.volume,
            "sigma_positive_up_to": self.sigma_positive_up_to,
            "newton_spectra_positive": int(self.newton_spectra_positive),
            "roundness": self.roundness,
        }
        out.update(self.integrals)
        out.update(self.residuals)
        out.update(self.gaps)
        out.update({f"scale:{key}": val for key, val in self.scales.items()})
        return {key: val for key, val in out.items() if not (isinstance(val, float) and math.isnan(val))}

    def to_json(self) -> str:
        return json.dumps(self.flat(), indent=1, sort_keys=True)


def surface_report(profile, k: int, p_values=(0, 1, 2)) -> SurfaceReport:
    """Evaluate every functional for one surface and flow index ``k``."""
    surf = evaluate(profile)
    m, prof = surf.m, surf.profile
    _check_k(m, k, 1)
    scan = positivity_scan(surf, k)
    rep = SurfaceReport(m=m, k=k, N=prof.N, d=prof.d,
                        sigma_positive_up_to=scan.sigma_positive_up_to,
                        newton_spectra_positive=scan.newton_spectra_positive,
                        volume=volume(surf), roundness=roundness(prof))

    for j in range(m + 1):
        for p in sorted(set(p_values) | {0, 2}):
            rep.integrals[sigma_label(j, p)] = weighted_integral(surf, j, p)

    for j in range(1, m + 1):
        rep.residuals[f"hm_{j}"] = hsiung_minkowski_residual(surf, j)
        rep.scales[f"hm_{j}"] = abs(weighted_integral(surf, j - 1))
    off_surface = True
    try:
        _require_off_surface(surf)
    except SingularWeightError:
        off_surface = False
    for l in range(m):
        for p in p_values:
            if p != 0 and not off_surface:
                continue
            label = f"ghm_l{l}_p{p:g}"
            lhs, normal, tangential = _ghm_terms(surf, l, p)
            rep.residuals[label] = lhs - normal + tangential
            rep.scales[label] = max(abs(lhs), abs(normal), abs(tangential))

    kk = scan.sigma_positive_up_to
    if k <= kk:
        rep.guan_li = guan_li(surf, k)
        if k >= 2:
            rep.Q_k = q_k(surf, k)
        if off_surface:
            for l in range(k):
                for p in p_values:
                    label = f"theorem2_k{k}_l{l}_p{p:g}"
                    upper = weighted_integral(surf, k, p + k - l)
                    lower = weighted_integral(surf, l, p)
                    rep.gaps[label] = upper - lower
                    rep.scales[label] = max(abs(upper), abs(lower))
        if k < m:
            rep.gaps["quermass_gap"] = quermassintegral_gap(surf, k)
            rep.scales["quermass_gap"] = (rep.integrals[sigma_label(k, 0)] / sphere_area(m)) ** (1.0 / (m - k))
    if kk >= 1:
        rep.gaps["ros_gap"] = ros_gap(surf)
        rep.scales["ros_gap"] = (m + 1) * rep.volume
        rep.Q_1 = q1(surf)
    return rep
