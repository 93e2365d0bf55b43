from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from icflow.oracles import esp_bruteforce, esp_delta_formula, newton_eigenvalues_bruteforce
from icflow.symmfunc import (
    CurvatureSpectrum,
    elementary_symmetric,
    esp_table,
    garding_member,
    newton_inequality_gap,
    newton_spectrum,
    sigma,
    trace_identities,
)

finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)
spectra = st.lists(finite, min_size=1, max_size=10)


def scale_of(values, k):
    return max(esp_bruteforce(np.abs(values), k), 1e-300)


def test_elementary_symmetric_examples():
    assert elementary_symmetric((1, 2, 3), 2) == pytest.approx(esp_bruteforce([1, 2, 3], 2))
    assert esp_bruteforce([1, 2, 3], 2) == 11
    assert elementary_symmetric((1, 2, 3), 0) == 1
    assert elementary_symmetric((0.3, -7.0), 0) == 1
    assert elementary_symmetric((1, 2, 3), 4) == 0


def test_elementary_symmetric_rejects_negative_k():
    with pytest.raises(ValueError):
        elementary_symmetric((1, 2), -1)


def test_spectrum_rejects_non_finite():
    with pytest.raises(ValueError):
        CurvatureSpectrum([1.0, np.nan])
    with pytest.raises(ValueError):
        CurvatureSpectrum([np.inf])


def test_sigma_examples():
    assert sigma((1, 2, 3), 2) == pytest.approx(11 / 3, rel=1e-15)
    assert sigma((1, 2, 3), 0) == 1
    R = 2.5
    for m in (2, 3, 5):
        for k in range(m + 1):
            assert sigma([1 / R] * m, k) == pytest.approx(R**-k, rel=1e-14)
    with pytest.raises(ValueError):
        sigma((1, 2, 3), 4)


def test_newton_spectrum_examples():
    assert np.allclose(newton_spectrum((1, 2, 3), 1).eigenvalues, [5, 4, 3], rtol=0, atol=1e-15)
    assert np.array_equal(newton_spectrum((1, 2, 3), 0).eigenvalues, [1, 1, 1])
    c, m = 1.7, 5
    for q in range(m):
        eig = newton_spectrum([c] * m, q).eigenvalues
        assert np.allclose(eig, comb(m - 1, q) * c**q, rtol=1e-14)
    with pytest.raises(ValueError):
        newton_spectrum((1, 2, 3), 3)


def test_trace_identities_examples():
    tr = trace_identities((1, 2, 3), 2)
    assert tr == pytest.approx((12, 22, 48), rel=1e-15)
    c, m = 0.8, 4
    for k in range(1, m + 1):
        assert trace_identities([c] * m, k).tr_T == pytest.approx(
            (m - k + 1) * comb(m, k - 1) * c ** (k - 1), rel=1e-14)
    assert trace_identities((1, 0, 0, 0), 1) == (4, 1, 1)


def test_newton_inequality_gap_examples():
    assert newton_inequality_gap((1, 2, 3), 1) == pytest.approx(1 / 3, rel=1e-14)
    assert newton_inequality_gap((1, -1), 1) == pytest.approx(1.0, rel=1e-15)
    assert newton_inequality_gap([0.7] * 6, 3) == pytest.approx(0.0, abs=1e-15)


def test_garding_member_examples():
    assert garding_member((3, 3, -1), 2)
    assert sigma((3, 3, -1), 1) == pytest.approx(5 / 3) and sigma((3, 3, -1), 2) == pytest.approx(1)
    assert not garding_member((3, 3, -1), 3)
    assert sigma((3, 3, -1), 3) == pytest.approx(-9)
    for m in (1, 4, 7):
        assert all(garding_member([1.0] * m, k) for k in range(1, m + 1))


@given(spectra)
@settings(max_examples=300)
def test_matches_subset_oracle(values):
    values = np.array(values)
    for k in range(len(values) + 1):
        got = elementary_symmetric(values, k)
        assert abs(got - esp_bruteforce(values, k)) <= 1e-12 * scale_of(values, k)


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_delta_formula_agrees_for_symmetric_matrices(m, seed):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((m, m))
    A = 0.5 * (B + B.T)
    kappa = np.linalg.eigvalsh(A)
    for k in range(m + 2):
        want = esp_delta_formula(A, k)
        got = elementary_symmetric(kappa, k)
        assert got == pytest.approx(want, abs=1e-10 * (1 + scale_of(kappa, k)))


@given(st.lists(finite, min_size=1, max_size=4))
@settings(max_examples=60, deadline=None)
def test_delta_formula_agrees_for_diagonal(values):
    A = np.diag(values)
    for k in range(len(values) + 1):
        assert esp_delta_formula(A, k) == pytest.approx(
            elementary_symmetric(values, k), abs=1e-12 * scale_of(np.array(values), k))


@given(st.lists(finite, min_size=2, max_size=8), st.data())
def test_deletion_identity(values, data):
    values = np.array(values)
    m = values.size
    k = data.draw(st.integers(1, m))
    H = elementary_symmetric(values, k)
    lam = newton_spectrum(values, k - 1).eigenvalues
    for j in range(m):
        rest = np.delete(values, j)
        rebuilt = elementary_symmetric(rest, k) + values[j] * lam[j]
        assert abs(H - rebuilt) <= 1e-12 * (scale_of(values, k) + 1e-300)
    assert np.allclose(lam, newton_eigenvalues_bruteforce(values, k - 1),
                       rtol=0, atol=1e-12 * max(1.0, scale_of(values, k - 1)))


@given(spectra, st.data())
def test_trace_identities_property(values, data):
    values = np.array(values)
    m = values.size
    k = data.draw(st.integers(1, m))
    H = esp_table(values)
    Habs = esp_table(np.abs(values))
    Hk1 = H[k + 1] if k < m else 0.0
    Hk1_abs = Habs[k + 1] if k < m else 0.0
    tr = trace_identities(values, k)
    # absolute slack covers subnormal underflow of the products
    tiny = 1e-300
    assert abs(tr.tr_T - (m - k + 1) * H[k - 1]) <= 1e-12 * (m - k + 1) * Habs[k - 1] + tiny
    assert abs(tr.tr_TA - k * H[k]) <= 1e-12 * k * Habs[k] + tiny
    assert abs(tr.tr_TAA - (H[k] * H[1] - (k + 1) * Hk1)) <= 1e-12 * (
        Habs[k] * Habs[1] + (k + 1) * Hk1_abs) + tiny


@given(st.lists(finite, min_size=2, max_size=10), st.data())
def test_newton_inequality_nonnegative(values, data):
    values = np.array(values)
    i = data.draw(st.integers(1, values.size - 1))
    scale = sigma(np.abs(values), i) ** 2 + 1e-300
    assert newton_inequality_gap(values, i) >= -1e-12 * scale


@given(st.floats(0.1, 5), st.integers(2, 8), st.data())
def test_newton_gap_zero_iff_umbilic(c, m, data):
    i = data.draw(st.integers(1, m - 1))
    assert abs(newton_inequality_gap([c] * m, i)) <= 1e-12 * c ** (2 * i)
    spread = data.draw(st.floats(0.05, 1.0))
    values = [c] * (m - 1) + [c + spread * c]
    assert newton_inequality_gap(values, i) > 1e-12 * c ** (2 * i)


@given(spectra, st.data())
def test_garding_cone_nested(values, data):
    m = len(values)
    k = data.draw(st.integers(1, m))
    if garding_member(values, k):
        assert all(garding_member(values, l) for l in range(1, k + 1))
