"""Symmetric eigendecomposition with the scaling and ordering conventions
shared by every other module.

Conventions:

* Eigenvalues of an n x n matrix are divided by n ("function scale"), so the
  squared eigenvalues of a binary matrix sum to its mean entry.
* Spectra are sorted signed-descending.  Selecting all n eigenvalues by
  absolute value and then ordering them decreasing reduces to exactly this,
  so the full spectrum is always kept.
* Eigenvector signs are normalized (first nonzero coordinate positive) so
  repeated runs produce identical bases.
"""

from dataclasses import dataclass, field

import numpy as np

SYMMETRY_RTOL = 1e-12


def _coerce_square(m, what="matrix"):
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{what} must be square, got shape {a.shape}")
    if a.shape[0] < 1:
        raise ValueError(f"{what} must have at least one row")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{what} contains non-finite entries")
    return a


def symmetrize_checked(m, rtol=SYMMETRY_RTOL, what="matrix"):
    """Average a nearly-symmetric matrix, rejecting asymmetry beyond `rtol`.

    The tolerance is relative to the largest absolute entry (with a floor of
    1.0), which tolerates file round-trip noise without accepting genuinely
    asymmetric data.
    """
    a = _coerce_square(m, what)
    asym = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if asym > rtol * scale:
        raise ValueError(
            f"{what} is not symmetric: max |M - M'| = {asym:.3g} "
            f"exceeds tolerance {rtol:.3g} relative to scale {scale:.3g}"
        )
    return (a + a.T) / 2.0


@dataclass(frozen=True)
class OutcomeMatrix:
    """Square symmetric real matrix of pairwise outcomes for one arm."""

    entries: np.ndarray
    arm: int = 1

    def __post_init__(self):
        sym = symmetrize_checked(self.entries, what="outcome matrix")
        object.__setattr__(self, "entries", sym)
        if self.arm not in (0, 1):
            raise ValueError(f"arm must be 0 or 1, got {self.arm}")

    @property
    def n(self):
        return self.entries.shape[0]


def as_outcome_matrix(y, arm=1):
    """Coerce an array-like (or pass through an OutcomeMatrix) to OutcomeMatrix."""
    if isinstance(y, OutcomeMatrix):
        return y
    if isinstance(y, IndicatorMatrix):
        return OutcomeMatrix(y.entries, arm=y.base.arm)
    return OutcomeMatrix(y, arm=arm)


@dataclass(frozen=True)
class IndicatorMatrix:
    """Entrywise weak-inequality threshold of an outcome matrix."""

    base: OutcomeMatrix
    threshold: float
    entries: np.ndarray = field(init=False)

    def __post_init__(self):
        if not np.isfinite(self.threshold):
            raise ValueError("threshold must be finite")
        ind = (self.base.entries <= self.threshold).astype(float)
        object.__setattr__(self, "entries", ind)

    @property
    def n(self):
        return self.base.n

    @property
    def mean(self):
        """Fraction of entries at or below the threshold (the empirical CDF)."""
        return float(self.entries.mean())


def indicator(y, threshold):
    """Threshold an outcome matrix at `threshold` (weak inequality)."""
    return IndicatorMatrix(as_outcome_matrix(y), float(threshold))


@dataclass(frozen=True)
class Spectrum:
    """Normalized eigenvalues (signed-descending) with orthonormal eigenvectors.

    ``values[r]`` is the matrix eigenvalue divided by ``scale`` (= n); column
    ``vectors[:, r]`` is the unit eigenvector attached to it.
    """

    values: np.ndarray
    vectors: np.ndarray
    scale: int

    def __len__(self):
        return len(self.values)

    @property
    def mass(self):
        """Sum of squared normalized eigenvalues."""
        return float(np.sum(self.values**2))


def _entries_of(y):
    if isinstance(y, IndicatorMatrix):
        return y.entries
    if isinstance(y, OutcomeMatrix):
        return y.entries
    return np.asarray(y, dtype=float)


def _signed_descending_order(vals):
    # stable sort keeps the solver's output order among exact ties
    return np.argsort(-vals, kind="stable")


def _fix_signs(vectors):
    """Flip each column so its first nonzero coordinate is positive."""
    v = vectors.copy()
    n, m = v.shape
    for r in range(m):
        col = v[:, r]
        nz = np.nonzero(np.abs(col) > 1e-12 * max(1.0, np.max(np.abs(col))))[0]
        if nz.size and col[nz[0]] < 0:
            v[:, r] = -col
    return v


def eig_sorted(m):
    """Full eigendecomposition of a symmetric matrix, normalized and ordered.

    Eigenvalues are divided by n and sorted signed-descending; eigenvectors
    are the matching orthonormal columns with deterministic signs.  The
    reconstruction sum_r (n * values[r]) * v_r v_r' recovers the input.
    """
    a = symmetrize_checked(_entries_of(m))
    n = a.shape[0]
    raw_vals, raw_vecs = np.linalg.eigh(a)
    order = _signed_descending_order(raw_vals)
    values = raw_vals[order] / n
    vectors = _fix_signs(raw_vecs[:, order])
    return Spectrum(values=values, vectors=vectors, scale=n)


def sorted_values(m):
    """Normalized signed-descending eigenvalues only (fast path, no vectors)."""
    a = _entries_of(m)
    n = a.shape[0]
    vals = np.linalg.eigvalsh((a + a.T) / 2.0)
    return np.sort(vals)[::-1] / n


def _values_of(spec):
    if isinstance(spec, Spectrum):
        return np.asarray(spec.values, dtype=float)
    return np.asarray(spec, dtype=float)


def eig_dot(spec_a, spec_b, pairing="sorted"):
    """Rank-paired inner product of two equal-length spectra.

    ``sorted`` pairs rank r with rank r (both signed-descending), which by
    the rearrangement inequality dominates every other pairing;
    ``antisorted`` pairs rank r with rank n - r + 1 and is dominated by
    every other pairing.
    """
    a = _values_of(spec_a)
    b = _values_of(spec_b)
    if a.shape != b.shape:
        raise ValueError(f"spectra length mismatch: {a.shape[0]} vs {b.shape[0]}")
    a = np.sort(a)[::-1]
    b = np.sort(b)[::-1]
    if pairing == "sorted":
        return float(np.dot(a, b))
    if pairing == "antisorted":
        return float(np.dot(a, b[::-1]))
    raise ValueError(f"unknown pairing {pairing!r} (expected 'sorted' or 'antisorted')")


def pad_values(values, length):
    """Zero-pad a value list to `length` and restore signed-descending order."""
    v = _values_of(values)
    if len(v) > length:
        raise ValueError(f"cannot pad length {len(v)} down to {length}")
    if len(v) == length:
        return np.sort(v)[::-1]
    padded = np.concatenate([v, np.zeros(length - len(v))])
    return np.sort(padded)[::-1]


def threshold_grid(y1, y0=None):
    """Sorted distinct entry values of the given matrices plus two sentinels.

    The sentinels sit strictly below the minimum and strictly above the
    maximum entry, so the grid covers the all-zeros and all-ones indicator
    regimes.  Step-function quantities of the threshold are constant between
    consecutive grid points, which is why optimizing over this finite set is
    exhaustive.
    """
    pools = [_entries_of(y1).ravel()]
    if y0 is not None:
        pools.append(_entries_of(y0).ravel())
    pooled = np.concatenate(pools)
    distinct = np.unique(pooled)
    return np.concatenate([[distinct[0] - 1.0], distinct, [distinct[-1] + 1.0]])
