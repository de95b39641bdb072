"""Brute-force enumeration oracles for sharp finite-type bounds.

These enumerate every relabeling at desk scale and serve as ground truth
for the eigenvalue relaxations.  The two-permutation objective over
(P0, P1) depends only on the relative permutation P1 * P0^-1 (joint
relabeling leaves the counting sum unchanged), so a single permutation is
enumerated; a unit test checks the reduction against the two-permutation
form at n = 3.
"""

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .spectra import _entries_of

MAX_SQUARE_N = 8
MAX_BIPARTITE_SIDE = 5


@dataclass(frozen=True)
class SharpInterval:
    """Exact min/max of an objective over all relabelings, with argmins."""

    min: float
    max: float
    argmin_perm: tuple
    argmax_perm: tuple


def _guard(n, limit, what):
    if n > limit:
        raise ValueError(
            f"{what} enumeration is factorial; n = {n} exceeds the guard ({limit})"
        )


def _enumerate_relative(a1, a0):
    """Yield (perm, mean of a1[perm][:, perm] * a0) over all permutations."""
    n = a1.shape[0]
    for perm in permutations(range(n)):
        p = np.asarray(perm)
        value = float(np.sum(a1[np.ix_(p, p)] * a0)) / n**2
        yield perm, value


def _extremize(pairs):
    best_min, best_max = None, None
    for perm, value in pairs:
        if best_min is None or value < best_min[1]:
            best_min = (perm, value)
        if best_max is None or value > best_max[1]:
            best_max = (perm, value)
    return SharpInterval(
        min=best_min[1], max=best_max[1],
        argmin_perm=best_min[0], argmax_perm=best_max[0],
    )


def qap_sharp_dpo(a1, a0):
    """Sharp joint-mass interval: extremes of (1/n^2) sum_ij A1[p(i),p(j)] A0[i,j]
    over all permutations p of the n agents."""
    m1 = _entries_of(a1)
    m0 = _entries_of(a0)
    if m1.shape != m0.shape:
        raise ValueError(f"size mismatch: {m1.shape} vs {m0.shape}")
    _guard(m1.shape[0], MAX_SQUARE_N, "joint-mass")
    return _extremize(_enumerate_relative(m1, m0))


def brute_dte_sharp(y1, y0, y):
    """Sharp interval for the fraction of pairs with Y1[p(i),p(j)] - Y0[i,j] <= y."""
    m1 = _entries_of(y1)
    m0 = _entries_of(y0)
    if m1.shape != m0.shape:
        raise ValueError(f"size mismatch: {m1.shape} vs {m0.shape}")
    n = m1.shape[0]
    _guard(n, MAX_SQUARE_N, "effect-distribution")

    def pairs():
        for perm in permutations(range(n)):
            p = np.asarray(perm)
            value = float(np.mean(m1[np.ix_(p, p)] - m0 <= y))
            yield perm, value

    return _extremize(pairs())


def bipartite_sharp_dpo(a1, a0):
    """Sharp overlap interval over independent row and column permutations.

    Rows and columns index two different populations, so they are relabeled
    independently: extremes of (1/(nr*nc)) sum_ij A1[r(i), c(j)] A0[i, j].
    """
    m1 = np.asarray(_entries_of(a1), dtype=float)
    m0 = np.asarray(_entries_of(a0), dtype=float)
    if m1.shape != m0.shape:
        raise ValueError(f"size mismatch: {m1.shape} vs {m0.shape}")
    nr, nc = m1.shape
    _guard(nr, MAX_BIPARTITE_SIDE, "bipartite row")
    _guard(nc, MAX_BIPARTITE_SIDE, "bipartite column")

    def pairs():
        for rperm in permutations(range(nr)):
            r = np.asarray(rperm)
            m1r = m1[r, :]
            for cperm in permutations(range(nc)):
                c = np.asarray(cperm)
                value = float(np.sum(m1r[:, c] * m0)) / (nr * nc)
                yield (rperm, cperm), value

    return _extremize(pairs())
