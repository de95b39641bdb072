"""Eigenvalue bounds on the joint distribution of potential outcomes (DPO)
and on the distribution of treatment effects (DTE).

The joint mass of two thresholded outcome matrices is bracketed by
intersecting two relaxations of the exact (intractable) quadratic
assignment problem:

* mass branches: the squared normalized eigenvalues of a binary matrix sum
  to its mean, so the joint mass is at most each arm's marginal mass and at
  least their sum minus one;
* rearrangement branches: the joint mass lies between the antisorted and
  sorted rank pairings of the two spectra.

DTE bounds scan threshold pairs (y1, y0) with y1 - y0 = y over a finite
candidate grid; step functions attain their sup/inf there.
"""

from dataclasses import dataclass, replace

import numpy as np

from .spectra import (
    as_outcome_matrix,
    eig_dot,
    indicator,
    pad_values,
    sorted_values,
    threshold_grid,
)

_CLIP_EPS = 1e-12


@dataclass(frozen=True)
class IntervalBound:
    """A (lower, upper) bracket on a probability.

    ``binding_lower``/``binding_upper`` record which branch of the max/min
    was active; bounds derived by affine transforms or averaging carry None.
    """

    lower: float
    upper: float
    binding_lower: str | None = None
    binding_upper: str | None = None

    def __post_init__(self):
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise ValueError("bound endpoints must be finite")
        lo, up = self.lower, self.upper
        if lo > up:
            if lo - up > 1e-9:
                raise ValueError(f"invalid interval: lower {lo} > upper {up}")
            lo = up  # repair rounding-level inversions only
        object.__setattr__(self, "lower", float(lo))
        object.__setattr__(self, "upper", float(up))
        if self.lower < -_CLIP_EPS or self.upper > 1 + _CLIP_EPS:
            raise ValueError(
                f"interval [{self.lower}, {self.upper}] escapes [0, 1]; clip first"
            )

    def clip(self):
        return replace(
            self,
            lower=min(max(self.lower, 0.0), 1.0),
            upper=min(max(self.upper, 0.0), 1.0),
        )

    def contains(self, other, slack=0.0):
        """Whether [other.min, other.max] (or another bound) sits inside."""
        lo = getattr(other, "lower", None)
        if lo is None:
            lo, up = other.min, other.max
        else:
            up = other.upper
        return self.lower - slack <= lo and up <= self.upper + slack


def _clip01(x):
    return float(min(max(x, 0.0), 1.0))


def _argmax_tagged(candidates):
    """(value, tag) of the max; ties resolved by listing order."""
    best = candidates[0]
    for cand in candidates[1:]:
        if cand[0] > best[0]:
            best = cand
    return best


def _argmin_tagged(candidates):
    best = candidates[0]
    for cand in candidates[1:]:
        if cand[0] < best[0]:
            best = cand
    return best


def _padded_indicator_values(y1, y0, t1, t0, exclude_diagonal=False):
    a1 = indicator(y1, t1).entries
    a0 = indicator(y0, t0).entries
    if exclude_diagonal:
        np.fill_diagonal(a1, 0.0)
        np.fill_diagonal(a0, 0.0)
    v1 = sorted_values(a1)
    v0 = sorted_values(a0)
    n = max(len(v1), len(v0))
    return pad_values(v1, n), pad_values(v0, n)


def dpo_branch_terms(y1, y0, t1, t0, exclude_diagonal=False):
    """(mass1, mass0, sorted product, antisorted product) at one threshold pair."""
    v1, v0 = _padded_indicator_values(y1, y0, t1, t0, exclude_diagonal)
    mass1 = float(np.sum(v1**2))
    mass0 = float(np.sum(v0**2))
    return mass1, mass0, eig_dot(v1, v0, "sorted"), eig_dot(v1, v0, "antisorted")


def dpo_bounds(y1, y0, t1, t0, exclude_diagonal=False):
    """Bracket the joint mass P(Y1 <= t1, Y0 <= t0) from the two spectra.

    Arms may differ in size; spectra are zero-padded to a common length
    before rank pairing (mass terms are unaffected).  With
    ``exclude_diagonal`` self-pairs are dropped from the indicator counts
    (equivalent to treating self outcomes as above every threshold), for
    network data where self-links are undefined.
    """
    y1 = as_outcome_matrix(y1, arm=1)
    y0 = as_outcome_matrix(y0, arm=0)
    mass1, mass0, dot_sorted, dot_anti = dpo_branch_terms(
        y1, y0, t1, t0, exclude_diagonal
    )
    lower, tag_lo = _argmax_tagged(
        [(mass1 + mass0 - 1.0, "binarySum"), (dot_anti, "antisorted"), (0.0, "zero")]
    )
    upper, tag_up = _argmin_tagged(
        [(mass1, "mass1"), (mass0, "mass0"), (dot_sorted, "sortedProduct")]
    )
    return IntervalBound(
        lower=_clip01(lower),
        upper=_clip01(upper),
        binding_lower=tag_lo,
        binding_upper=tag_up,
    )


def _dte_candidates(y1, y0, y):
    """Threshold-pair candidates (v, v - y) covering every step breakpoint.

    Each candidate v is also nudged down by half the minimum grid gap: the
    sup/inf in the effect-distribution bracket ranges over strict as well as
    weak threshold positions, and the nudge realizes the strict side on the
    finite grid.
    """
    g1 = threshold_grid(y1)
    g0 = threshold_grid(y0) + y
    grid = np.unique(np.concatenate([g1, g0]))
    gaps = np.diff(grid)
    gaps = gaps[gaps > 0]
    delta = gaps.min() / 2.0 if gaps.size else 0.5
    return np.unique(np.concatenate([grid, grid - delta]))


def dte_bounds(y1, y0, y, exclude_diagonal=False):
    """Bracket the mass of pairs with treatment effect at most y.

    Scans candidate threshold pairs (v, v - y); for each, the joint-mass
    branches give one lower and one upper term, and the envelope over
    candidates is returned (clipped to [0, 1]).
    """
    y1 = as_outcome_matrix(y1, arm=1)
    y0 = as_outcome_matrix(y0, arm=0)
    best_lower = 0.0
    best_upper_inner = 0.0
    tag_lo, tag_up = "zero", "zero"
    for v in _dte_candidates(y1, y0, y):
        mass1, mass0, dot_sorted, _ = dpo_branch_terms(
            y1, y0, v, v - y, exclude_diagonal
        )
        cand_lower, cand_lo_tag = _argmax_tagged(
            [
                (mass1 - mass0, "massGap"),
                (mass1 - dot_sorted, "sortedGap"),
                (0.0, "zero"),
            ]
        )
        cand_upper, cand_up_tag = _argmin_tagged(
            [
                (mass1 - mass0, "massGap"),
                (dot_sorted - mass0, "sortedGap"),
                (0.0, "zero"),
            ]
        )
        if cand_lower > best_lower:
            best_lower, tag_lo = cand_lower, cand_lo_tag
        if cand_upper < best_upper_inner:
            best_upper_inner, tag_up = cand_upper, cand_up_tag
    return IntervalBound(
        lower=_clip01(best_lower),
        upper=_clip01(1.0 + best_upper_inner),
        binding_lower=tag_lo,
        binding_upper=tag_up,
    )


@dataclass(frozen=True)
class DteCurve:
    """Pointwise effect-distribution bounds along a sorted grid of y values."""

    grid: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    monotonized: bool

    def __post_init__(self):
        if np.any(np.asarray(self.lower) > np.asarray(self.upper) + 1e-12):
            raise ValueError("curve has lower > upper at some grid point")


def dte_curve(y1, y0, grid, monotonize=False, exclude_diagonal=False):
    """Batch dte_bounds over a sorted grid.

    With ``monotonize`` the lower curve is replaced by its running max and
    the upper curve by its suffix min.  Both are valid because the target is
    a CDF; the result is a pointwise tightening of the raw curve.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0:
        raise ValueError("grid must be a nonempty 1-d array")
    if np.any(np.diff(grid) < 0):
        raise ValueError("grid must be sorted ascending")
    lows, ups = [], []
    for y in grid:
        b = dte_bounds(y1, y0, float(y), exclude_diagonal)
        lows.append(b.lower)
        ups.append(b.upper)
    lower = np.asarray(lows)
    upper = np.asarray(ups)
    if monotonize:
        lower = np.maximum.accumulate(lower)
        upper = np.minimum.accumulate(upper[::-1])[::-1]
    return DteCurve(grid=grid, lower=lower, upper=upper, monotonized=monotonize)


def _require_binary(m, what):
    entries = as_outcome_matrix(m).entries
    if not np.all((entries == 0.0) | (entries == 1.0)):
        bad = entries[(entries != 0.0) & (entries != 1.0)]
        raise ValueError(f"{what} must be binary; found entry {bad.flat[0]}")
    return entries


def binary_cell_bounds(y1, y0, exclude_diagonal=False):
    """Bounds on all four joint cells of a binary outcome pair.

    Returns a dict keyed by (a, b) for the cell P(Y1 = a, Y0 = b).  The
    (0, 0) cell is the joint mass at thresholds (0, 0); the other three
    follow from the marginals by inclusion-exclusion and are clipped.

    With ``exclude_diagonal`` self-pairs are treated as above threshold in
    both arms (never counted as zeros), which keeps the cell identities
    exact on the full n^2-cell grid while ignoring undefined self-links.
    """
    e1 = _require_binary(y1, "treated matrix")
    e0 = _require_binary(y0, "control matrix")
    base = dpo_bounds(y1, y0, 0.0, 0.0, exclude_diagonal)
    lo, up = base.lower, base.upper
    if exclude_diagonal:
        off1 = ~np.eye(e1.shape[0], dtype=bool)
        off0 = ~np.eye(e0.shape[0], dtype=bool)
        f1 = float(np.mean((e1 == 0) & off1))
        f0 = float(np.mean((e0 == 0) & off0))
    else:
        f1 = float(np.mean(e1 == 0))
        f0 = float(np.mean(e0 == 0))

    def cell(lo_, up_):
        return IntervalBound(lower=_clip01(lo_), upper=_clip01(up_))

    return {
        (0, 0): cell(lo, up),
        (0, 1): cell(f1 - up, f1 - lo),
        (1, 0): cell(f0 - up, f0 - lo),
        (1, 1): cell(1.0 - f1 - f0 + lo, 1.0 - f1 - f0 + up),
    }


def weighted_average_bounds(bounds, weights):
    """Weighted mean of interval bounds (weights normalized to sum 1)."""
    bounds = list(bounds)
    w = np.asarray(weights, dtype=float)
    if len(bounds) != len(w):
        raise ValueError(f"{len(bounds)} bounds but {len(w)} weights")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    total = w.sum()
    if total <= 0:
        raise ValueError("weights must sum to a positive value")
    w = w / total
    lower = float(np.dot(w, [b.lower for b in bounds]))
    upper = float(np.dot(w, [b.upper for b in bounds]))
    return IntervalBound(lower=lower, upper=upper)
