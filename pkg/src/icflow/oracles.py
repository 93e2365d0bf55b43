"""Slow, independent reference computations.

Nothing here shares code with ``symmfunc``; these exist to check it.
"""

from __future__ import annotations

from itertools import combinations, permutations

import numpy as np


def esp_bruteforce(values, k: int) -> np.ndarray:
    """``e_k`` by summing products over all k-subsets. Batched over leading axes."""
    values = np.asarray(values, dtype=float)
    m = values.shape[-1]
    if k == 0:
        return np.ones(values.shape[:-1])
    if k > m:
        return np.zeros(values.shape[:-1])
    idx = np.array(list(combinations(range(m), k)))
    return np.prod(values[..., idx], axis=-1).sum(axis=-1)


def _perm_sign(perm) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def esp_delta_formula(A, k: int) -> float:
    """``H_k`` of a matrix via the generalized Kronecker delta sum.

    ``(1/k!) sum delta^{i_1..i_k}_{j_1..j_k} A_{i_1}^{j_1} ... A_{i_k}^{j_k}``.
    The delta is non-zero only when the j's are a permutation of distinct
    i's, so the sum runs over ordered distinct i-tuples and permutations.
    """
    A = np.asarray(A, dtype=float)
    m = A.shape[0]
    if k == 0:
        return 1.0
    if k > m:
        return 0.0
    total = 0.0
    fact = 1
    for q in range(2, k + 1):
        fact *= q
    perms = [(p, _perm_sign(p)) for p in permutations(range(k))]
    for rows in permutations(range(m), k):
        for perm, sign in perms:
            prod = 1.0
            for a in range(k):
                prod *= A[rows[a], rows[perm[a]]]
            total += sign * prod
    return total / fact


def newton_eigenvalues_bruteforce(values, order: int) -> np.ndarray:
    """Eigenvalue of ``T_order`` on e_j as a sum over subsets avoiding j."""
    values = np.asarray(values, dtype=float)
    m = values.shape[-1]
    out = np.empty(values.shape)
    for j in range(m):
        rest = [i for i in range(m) if i != j]
        out[..., j] = esp_bruteforce(values[..., rest], order)
    return out
