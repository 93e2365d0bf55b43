"""Star-shaped hypersurfaces of revolution as radial graphs over the polar angle.

A surface in R^{m+1} is stored as samples of ``rho(theta)`` on the
cell-centered grid ``theta_i = (i + 1/2) pi / N``. The point at polar angle
``theta`` and azimuthal direction ``omega`` in S^{m-1} is
``rho(theta) (cos(theta) e_z + sin(theta) omega)``. Derivatives come from the
even cosine interpolant, so ``rho'`` vanishes at both poles by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import fft
from scipy.special import eval_legendre, gammaln

from .exceptions import NumericalDegeneracyError
from .symmfunc import CurvatureSpectrum

FILTER_THRESHOLD = 1e-13


def cell_centered_grid(N: int) -> np.ndarray:
    return (np.arange(N) + 0.5) * np.pi / N


def sphere_area(n: int) -> float:
    """Area of the unit n-sphere S^n in R^{n+1}."""
    return 2.0 * math.exp(0.5 * (n + 1) * math.log(math.pi) - gammaln(0.5 * (n + 1)))


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Samples of the radial function plus the axial offset ``d`` of the origin O."""

    m: int
    rho: np.ndarray
    d: float = 0.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ValueError(f"m must be an integer >= 2, got {self.m}")
        rho = np.array(self.rho, dtype=float).reshape(-1)
        if rho.size < 4:
            raise ValueError("need at least 4 grid nodes")
        if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
            raise ValueError("rho must be finite and strictly positive")
        if not math.isfinite(self.d):
            raise ValueError("origin offset must be finite")
        rho.setflags(write=False)
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "d", float(self.d))

    @property
    def N(self) -> int:
        return self.rho.size

    @property
    def theta(self) -> np.ndarray:
        return cell_centered_grid(self.N)

    def with_rho(self, rho) -> "RadialProfile":
        return RadialProfile(self.m, rho, self.d)

    def scaled(self, factor: float) -> "RadialProfile":
        return RadialProfile(self.m, self.rho * factor, self.d * factor)


@dataclass(frozen=True, eq=False)
class PointFrame:
    """Per-node geometry. Fields are arrays over the grid (or scalars for one node)."""

    m: int
    theta: np.ndarray
    rho: np.ndarray
    kappa_mer: np.ndarray
    kappa_par: np.ndarray
    w: np.ndarray
    area_density: np.ndarray
    support: np.ndarray
    support_O: np.ndarray
    r_O: np.ndarray
    ytan_sq: np.ndarray

    def __len__(self):
        return np.size(self.theta)

    def __getitem__(self, i) -> "PointFrame":
        fields = {name: getattr(self, name)[i] for name in _ARRAY_FIELDS}
        return PointFrame(self.m, **fields)


_ARRAY_FIELDS = (
    "theta", "rho", "kappa_mer", "kappa_par", "w", "area_density",
    "support", "support_O", "r_O", "ytan_sq",
)


def cosine_coefficients(rho) -> np.ndarray:
    """Coefficients ``a_n`` with ``rho(theta_i) = sum_n a_n cos(n theta_i)``."""
    rho = np.asarray(rho, dtype=float)
    a = fft.dct(rho, type=2) / rho.size
    a[0] *= 0.5
    return a


def cosine_synthesis(a) -> np.ndarray:
    x = np.asarray(a, dtype=float) * 0.5
    x[0] = a[0]
    return fft.dct(x, type=3)


def derivatives(profile: RadialProfile):
    """First and second theta-derivatives of the cosine interpolant at the nodes."""
    a = cosine_coefficients(profile.rho)
    n = np.arange(a.size, dtype=float)
    # sin(n theta) for n = 1..N-1 is carried by DST-III slots 0..N-2
    x = np.zeros_like(a)
    x[:-1] = -0.5 * n[1:] * a[1:]
    rho_p = fft.dst(x, type=3)
    rho_pp = cosine_synthesis(-(n**2) * a)
    return rho_p, rho_pp


def spectral_filter(rho, threshold=FILTER_THRESHOLD) -> np.ndarray:
    """Drop cosine modes below ``threshold`` relative to the largest one."""
    a = cosine_coefficients(rho)
    a[np.abs(a) < threshold * np.abs(a).max()] = 0.0
    return cosine_synthesis(a)


def pole_values(profile: RadialProfile):
    """``rho`` at theta = 0 and theta = pi from the cosine interpolant."""
    a = cosine_coefficients(profile.rho)
    signs = (-1.0) ** np.arange(a.size)
    return float(a.sum()), float((signs * a).sum())


def point_frames(profile: RadialProfile) -> PointFrame:
    rho = profile.rho
    m, d = profile.m, profile.d
    theta = profile.theta
    rho_p, rho_pp = derivatives(profile)
    sin, cos = np.sin(theta), np.cos(theta)

    w = np.sqrt(rho**2 + rho_p**2)
    kappa_mer = (rho**2 + 2.0 * rho_p**2 - rho * rho_pp) / w**3
    kappa_par = (rho * sin - rho_p * cos) / (rho * sin * w)
    area_density = (rho * sin) ** (m - 1) * w
    support = rho**2 / w
    nu_z = (rho * cos + rho_p * sin) / w
    support_O = support - d * nu_z
    r_sq = rho**2 - 2.0 * rho * d * cos + d**2
    r_O = np.sqrt(np.maximum(r_sq, 0.0))
    ytan_sq = np.maximum(r_sq - support_O**2, 0.0)

    for name, arr in (("kappa_mer", kappa_mer), ("kappa_par", kappa_par)):
        bad = np.flatnonzero(~np.isfinite(arr))
        if bad.size:
            raise NumericalDegeneracyError(f"non-finite {name}", node=int(bad[0]))

    return PointFrame(m, theta, rho, kappa_mer, kappa_par, w, area_density,
                      support, support_O, r_O, ytan_sq)


def curvature_spectrum(frame: PointFrame, m: int | None = None) -> CurvatureSpectrum:
    """Spectrum at a single node: one meridian curvature, m-1 parallel ones."""
    m = frame.m if m is None else m
    k_mer, k_par = float(np.asarray(frame.kappa_mer)), float(np.asarray(frame.kappa_par))
    return CurvatureSpectrum([k_mer] + [k_par] * (m - 1))


def spectra(frame: PointFrame) -> np.ndarray:
    """Spectra of every node stacked as an ``(N, m)`` array."""
    out = np.repeat(np.asarray(frame.kappa_par, dtype=float)[:, None], frame.m, axis=1)
    out[:, 0] = frame.kappa_mer
    return out


@lru_cache(maxsize=64)
def _theta_weights(N: int, m: int) -> np.ndarray:
    # (sin theta)^(m-1) is even-periodic only for odd m; for even m the
    # integrand is sin(theta) times a smooth function of cos(theta), which
    # Fejer's first rule integrates spectrally on this very grid.
    theta = cell_centered_grid(N)
    if m % 2 == 1:
        weights = np.full(N, np.pi / N)
    else:
        j = np.arange(1, N // 2 + 1)
        series = np.cos(2.0 * np.outer(theta, j)) / (4.0 * j**2 - 1.0)
        weights = (2.0 / N) * (1.0 - 2.0 * series.sum(axis=1)) / np.sin(theta)
    weights.setflags(write=False)
    return weights


def quadrature_weights(N: int, m: int) -> np.ndarray:
    """Weights ``q_i`` with ``int_0^pi g dtheta ~ sum_i q_i g(theta_i)``.

    Spectrally accurate for ``g = (sin theta)^(m-1) * (smooth even function)``.
    """
    return _theta_weights(int(N), int(m))


def integrate(frame: PointFrame, values) -> float:
    """``int_Sigma values dmu`` for per-node ``values``."""
    q = quadrature_weights(len(frame), frame.m)
    return float(sphere_area(frame.m - 1) * np.sum(q * frame.area_density * values))


def roundness(profile: RadialProfile) -> float:
    return float(profile.rho.max() / profile.rho.min())


def is_centered_sphere(profile: RadialProfile, tol=1e-9) -> bool:
    frame = point_frames(profile)
    mean = profile.rho.mean()
    return bool(
        np.max(np.abs(frame.kappa_mer - frame.kappa_par)) < tol * np.max(np.abs(frame.kappa_par))
        and np.max(np.abs(profile.rho - mean)) < tol * mean
    )


def make_profile(family: str, m: int, N: int, d: float = 0.0, **params) -> RadialProfile:
    """Build a test surface.

    Families: ``sphere(R)``, ``spheroid(a, c)`` with equatorial semi-axis
    ``a`` and polar semi-axis ``c``, ``legendre_bump(R, eps, n)`` with
    ``rho = R (1 + eps P_n(cos theta))``.
    """
    theta = cell_centered_grid(N)
    if family == "sphere":
        R = params.get("R", 1.0)
        _positive(R=R)
        rho = np.full(N, float(R))
    elif family == "spheroid":
        a, c = params.get("a", 1.0), params.get("c", 1.0)
        _positive(a=a, c=c)
        rho = (np.sin(theta) ** 2 / a**2 + np.cos(theta) ** 2 / c**2) ** -0.5
    elif family == "legendre_bump":
        R, eps, n = params.get("R", 1.0), params.get("eps", 0.0), int(params.get("n", 2))
        _positive(R=R)
        if n < 0:
            raise ValueError("Legendre degree must be non-negative")
        rho = R * (1.0 + eps * eval_legendre(n, np.cos(theta)))
    else:
        raise ValueError(f"unknown surface family {family!r}")
    return RadialProfile(m, rho, d)


def _positive(**kw):
    for name, value in kw.items():
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value}")


def write_profile_csv(profile: RadialProfile, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"# m={profile.m} N={profile.N} d={profile.d:.17g}\n")
        for t, r in zip(profile.theta, profile.rho):
            fh.write(f"{t:.17g},{r:.17g}\n")


def read_profile_csv(path) -> RadialProfile:
    with open(path) as fh:
        header = fh.readline().lstrip("#").split()
        meta = dict(item.split("=", 1) for item in header)
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    m, N, d = int(meta["m"]), int(meta["N"]), float(meta["d"])
    if data.shape[0] != N:
        raise ValueError(f"header says N={N} but file has {data.shape[0]} rows")
    if not np.allclose(data[:, 0], cell_centered_grid(N), rtol=0, atol=1e-12):
        raise ValueError("theta column is not the cell-centered grid")
    return RadialProfile(m, data[:, 1], d)
