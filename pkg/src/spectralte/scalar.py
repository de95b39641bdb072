"""Classical single-randomization results for vector outcomes: joint-CDF
bounds from the marginals, bounds on the CDF of the effect, quantile
treatment effects, and covariate-binned average effects for comparison
plots.

Empirical CDFs are right-continuous step functions; quantiles use the
left-continuous generalized inverse.
"""

from dataclasses import dataclass

import numpy as np

from .bounds import IntervalBound
from .spectra import as_outcome_matrix


@dataclass(frozen=True)
class OutcomeVector:
    """One outcome per agent for a single arm."""

    values: np.ndarray
    arm: int = 1

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size == 0:
            raise ValueError("outcome vector must be nonempty")
        if not np.all(np.isfinite(v)):
            raise ValueError("outcome vector contains non-finite values")
        object.__setattr__(self, "values", v)


def _values(y):
    if isinstance(y, OutcomeVector):
        return y.values
    return OutcomeVector(y).values


def ecdf(values, y):
    """Right-continuous empirical CDF: fraction of values <= y."""
    v = _values(values)
    if np.isposinf(y):
        return 1.0
    if np.isneginf(y):
        return 0.0
    return float(np.mean(v <= y))


def quantile(values, u):
    """Left-continuous inverse of the empirical CDF, Q(u) = inf{y : u <= F(y)}."""
    v = np.sort(_values(values))
    n = len(v)
    if not 0.0 < u <= 1.0:
        raise ValueError(f"quantile level must be in (0, 1], got {u}")
    return float(v[int(np.ceil(u * n)) - 1])


def fh_bounds(f1_at_y1, f0_at_y0):
    """Sharp joint-CDF bounds from two marginal CDF values."""
    for name, p in (("f1_at_y1", f1_at_y1), ("f0_at_y0", f0_at_y0)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {p}")
    lower = max(f1_at_y1 + f0_at_y0 - 1.0, 0.0)
    upper = min(f1_at_y1, f0_at_y0)
    return IntervalBound(lower=lower, upper=upper)


def makarov_bounds(y1, y0, y):
    """Sharp bounds on P(Y1 - Y0 <= y) from the two marginals.

    The sup/inf over threshold pairs (y1, y0) with y1 - y0 = y is attained
    on the finite grid of observed values (each also nudged just below, for
    the strict side), plus infinite sentinels.
    """
    v1 = _values(y1)
    v0 = _values(y0)
    grid = np.unique(np.concatenate([v1, v0 + y]))
    gaps = np.diff(grid)
    gaps = gaps[gaps > 0]
    delta = gaps.min() / 2.0 if gaps.size else 0.5
    candidates = np.concatenate([grid, grid - delta, [-np.inf, np.inf]])
    lower = 0.0
    upper_inner = 0.0
    for t in candidates:
        gap = ecdf(v1, t) - ecdf(v0, t - y)
        lower = max(lower, gap)
        upper_inner = min(upper_inner, gap)
    return IntervalBound(
        lower=min(max(lower, 0.0), 1.0),
        upper=min(max(1.0 + upper_inner, 0.0), 1.0),
    )


def qte(y1, y0, u):
    """Difference of marginal quantile functions at level u."""
    return quantile(y1, u) - quantile(y0, u)


def binned_cate(y1, y0, bins1, bins0):
    """Per-bin-pair differences in mean outcomes, with treated-cell weights.

    Agents in each arm carry a bin label; for every ordered pair of bins
    (a, b) the value is the mean treated outcome over cell (a, b) minus the
    mean control outcome over the same cell, weighted by the number of
    treated entries in the cell.  Weights sum to n1^2 (self-pairs and
    diagonal cells included).

    Returns (values, weights, labels) with labels the ordered bin pairs.
    """
    m1 = as_outcome_matrix(y1, arm=1).entries
    m0 = as_outcome_matrix(y0, arm=0).entries
    b1 = np.asarray(bins1)
    b0 = np.asarray(bins0)
    if len(b1) != m1.shape[0]:
        raise ValueError(f"{len(b1)} treated labels for {m1.shape[0]} agents")
    if len(b0) != m0.shape[0]:
        raise ValueError(f"{len(b0)} control labels for {m0.shape[0]} agents")
    labels1 = set(np.unique(b1).tolist())
    labels0 = set(np.unique(b0).tolist())
    if labels1 != labels0:
        missing = sorted(labels1 ^ labels0, key=str)
        raise ValueError(f"bins present in only one arm: {missing}")
    labels = sorted(labels1, key=str)
    values, weights, pairs = [], [], []
    for a in labels:
        rows1 = np.flatnonzero(b1 == a)
        rows0 = np.flatnonzero(b0 == a)
        for b in labels:
            cols1 = np.flatnonzero(b1 == b)
            cols0 = np.flatnonzero(b0 == b)
            cell1 = m1[np.ix_(rows1, cols1)]
            cell0 = m0[np.ix_(rows0, cols0)]
            values.append(float(cell1.mean() - cell0.mean()))
            weights.append(float(cell1.size))
            pairs.append((a, b))
    return np.asarray(values), np.asarray(weights), pairs
