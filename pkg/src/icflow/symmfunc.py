"""Elementary symmetric functions of principal curvatures.

All routines work on a single spectrum (``CurvatureSpectrum`` or any
sequence of floats) and the ``*_table`` helpers accept stacked spectra of
shape ``(..., m)`` so the geometry layer can evaluate every grid node at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import NamedTuple, Sequence, Union

import numpy as np


@dataclass(frozen=True, eq=False)
class CurvatureSpectrum:
    """Principal curvatures ``kappa_1..kappa_m`` at one point."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if values.size < 1:
            raise ValueError("a curvature spectrum needs at least one value")
        if not np.all(np.isfinite(values)):
            raise ValueError("curvature spectrum contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def m(self) -> int:
        return self.values.size

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, CurvatureSpectrum):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def __repr__(self):
        return f"CurvatureSpectrum({self.values.tolist()})"


@dataclass(frozen=True, eq=False)
class NewtonSpectrum:
    """Eigenvalues of the Newton transformation ``T_order``."""

    eigenvalues: np.ndarray
    order: int


class TraceIdentities(NamedTuple):
    tr_T: float
    tr_TA: float
    tr_TAA: float


SpectrumLike = Union[CurvatureSpectrum, Sequence[float], np.ndarray]


def _values(kappa: SpectrumLike) -> np.ndarray:
    if isinstance(kappa, CurvatureSpectrum):
        return kappa.values
    return CurvatureSpectrum(kappa).values


def esp_table(values, kmax=None) -> np.ndarray:
    """Return ``e_0..e_kmax`` of the last axis of ``values``.

    Expands ``prod_j (1 + kappa_j x)`` one factor at a time, which costs
    O(m * kmax) per spectrum and never forms a subset sum.
    """
    values = np.asarray(values, dtype=float)
    m = values.shape[-1]
    kmax = m if kmax is None else min(kmax, m)
    out = np.zeros(values.shape[:-1] + (kmax + 1,))
    out[..., 0] = 1.0
    for j in range(m):
        top = min(j + 1, kmax)
        kj = values[..., j : j + 1]
        # RHS is evaluated before assignment, so this is the reverse sweep.
        out[..., 1 : top + 1] = out[..., 1 : top + 1] + kj * out[..., 0:top]
    return out


def sigma_table(values) -> np.ndarray:
    """Normalized ``sigma_0..sigma_m`` along the last axis."""
    values = np.asarray(values, dtype=float)
    m = values.shape[-1]
    binom = np.array([comb(m, j) for j in range(m + 1)], dtype=float)
    return esp_table(values) / binom


def newton_table(values, order: int) -> np.ndarray:
    """Eigenvalues of ``T_order`` for stacked spectra, shape ``(..., m)``.

    Each eigenvalue is recomputed from the spectrum with one entry deleted.
    """
    values = np.asarray(values, dtype=float)
    m = values.shape[-1]
    if order < 0 or order >= m:
        raise ValueError(f"Newton transformation order must lie in [0, {m - 1}], got {order}")
    out = np.empty(values.shape)
    for j in range(m):
        reduced = np.delete(values, j, axis=-1)
        out[..., j] = esp_table(reduced, order)[..., order]
    return out


def elementary_symmetric(kappa: SpectrumLike, k: int) -> float:
    """``H_k``: the k-th elementary symmetric function of the curvatures.

    ``H_0 = 1`` and ``H_k = 0`` for ``k > m``.
    """
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    values = _values(kappa)
    if k > values.size:
        return 0.0
    return float(esp_table(values, k)[k])


def sigma(kappa: SpectrumLike, k: int) -> float:
    """``sigma_k = H_k / C(m, k)``."""
    values = _values(kappa)
    m = values.size
    if k < 0 or k > m:
        raise ValueError(f"sigma_k is only normalized for 0 <= k <= m={m}, got {k}")
    return elementary_symmetric(values, k) / comb(m, k)


def newton_spectrum(kappa: SpectrumLike, order: int) -> NewtonSpectrum:
    """Eigenvalues of ``T_order`` in the principal frame.

    The j-th eigenvalue is ``e_order`` of the spectrum with ``kappa_j``
    removed; ``T_0`` is the identity.
    """
    values = _values(kappa)
    eig = newton_table(values, order)
    eig.setflags(write=False)
    return NewtonSpectrum(eig, order)


def trace_identities(kappa: SpectrumLike, k: int) -> TraceIdentities:
    """Traces of ``T_{k-1}``, ``T_{k-1} A`` and ``T_{k-1} A^2``.

    These should equal ``(m-k+1) H_{k-1}``, ``k H_k`` and
    ``H_k H_1 - (k+1) H_{k+1}``.
    """
    values = _values(kappa)
    m = values.size
    if not 1 <= k <= m:
        raise ValueError(f"k must lie in [1, {m}], got {k}")
    lam = newton_table(values, k - 1)
    return TraceIdentities(
        float(lam.sum()),
        float((lam * values).sum()),
        float((lam * values**2).sum()),
    )


def newton_inequality_gap(kappa: SpectrumLike, i: int) -> float:
    """``sigma_i^2 - sigma_{i-1} sigma_{i+1}``; non-negative for real spectra."""
    values = _values(kappa)
    m = values.size
    if not 1 <= i <= m - 1:
        raise ValueError(f"i must lie in [1, {m - 1}], got {i}")
    s = sigma_table(values)
    return float(s[i] ** 2 - s[i - 1] * s[i + 1])


def garding_member(kappa: SpectrumLike, k: int) -> bool:
    """True when ``sigma_1, ..., sigma_k`` are all strictly positive."""
    values = _values(kappa)
    k = min(k, values.size)
    s = sigma_table(values)
    return bool(np.all(s[1 : k + 1] > 0))
