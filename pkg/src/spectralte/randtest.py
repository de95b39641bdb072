"""Randomization inference for three double-randomized designs.

All tests share the same machinery: a spectral distance between thresholded
outcome matrices, re-randomization of the treatment assignment under the
sharp null of no effect, and the standard (1 + #{resampled >= observed}) /
(A + 1) p-value, which is valid at any A.

Seeding: a root seed spawns one independent substream per resample index,
so serial and parallel execution produce identical reports.
"""

from dataclasses import dataclass

import numpy as np

from .bipartite import as_bipartite_matrix, symmetrize
from .spectra import as_outcome_matrix, pad_values, sorted_values

MAX_REDRAWS = 100


@dataclass(frozen=True)
class TestReport:
    """Observed statistic, resampled statistics, and the exact p-value."""

    __test__ = False  # not a pytest class, despite the name

    statistic: float
    resampled: np.ndarray
    p_value: float
    seed: int
    design: str

    def __post_init__(self):
        a = len(self.resampled)
        expected = (1.0 + float(np.sum(np.asarray(self.resampled) >= self.statistic))) / (
            a + 1.0
        )
        if abs(self.p_value - expected) > 1e-12:
            raise ValueError("p-value does not match the resample count")


def _report(statistic, resampled, seed, design):
    resampled = np.asarray(resampled, dtype=float)
    a = len(resampled)
    p = (1.0 + float(np.sum(resampled >= statistic))) / (a + 1.0)
    return TestReport(
        statistic=float(statistic),
        resampled=resampled,
        p_value=p,
        seed=int(seed),
        design=design,
    )


def _pooled_grid(*matrices):
    return np.unique(np.concatenate([np.ravel(m) for m in matrices]))


def _grid_spectra(entries, grid):
    """Sorted normalized eigenvalues of the thresholded matrix at each grid y."""
    return [sorted_values(entries <= y) for y in grid]


def _spectral_distance(spectra_a, spectra_b):
    """Sup over the grid of the squared distance between padded spectra."""
    worst = 0.0
    for va, vb in zip(spectra_a, spectra_b):
        n = max(len(va), len(vb))
        diff = pad_values(va, n) - pad_values(vb, n)
        worst = max(worst, float(np.sum(diff * diff)))
    return worst


def eig_distance_stat(m1, m0, grid):
    """Sup over thresholds of the squared spectral distance between the arms.

    Spectra are normalized by each arm's own size and zero-padded to a
    common length.  Thresholds below the pooled minimum give zero in both
    arms, so the distinct entry values suffice as a grid.
    """
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise ValueError("threshold grid must be nonempty")
    e1 = as_outcome_matrix(m1, arm=1).entries
    e0 = as_outcome_matrix(m0, arm=0).entries
    return _spectral_distance(_grid_spectra(e1, grid), _grid_spectra(e0, grid))


def matched_pair_test(pairs, a_resamples, seed):
    """Within-pair arm-swap test over matched treated/control matrix pairs.

    The per-pair statistic is symmetric under swapping the two arms, so the
    re-randomized statistic coincides with the observed one and the test is
    maximally conservative by construction; it is included for completeness
    of the design family and for its report contract.
    """
    pairs = [
        (as_outcome_matrix(m1, arm=1).entries, as_outcome_matrix(m0, arm=0).entries)
        for m1, m0 in pairs
    ]
    if not pairs:
        raise ValueError("need at least one matched pair")
    if a_resamples < 1:
        raise ValueError(f"number of resamples must be >= 1, got {a_resamples}")

    grids = [_pooled_grid(m1, m0) for m1, m0 in pairs]

    def statistic(pair_list):
        return max(
            _spectral_distance(_grid_spectra(m1, grid), _grid_spectra(m0, grid))
            for (m1, m0), grid in zip(pair_list, grids)
        )

    observed = statistic(pairs)
    streams = np.random.SeedSequence(seed).spawn(a_resamples)
    resampled = []
    for stream in streams:
        rng = np.random.default_rng(stream)
        swaps = rng.random(len(pairs)) < 0.5
        flipped = [
            (m0, m1) if swap else (m1, m0)
            for (m1, m0), swap in zip(pairs, swaps)
        ]
        resampled.append(statistic(flipped))
    return _report(observed, resampled, seed, "matchedPairs")


def _conjunctive_statistic(y, buyer_labels, seller_labels, grid):
    keys = [(s, t) for s in (1, 2) for t in (1, 2)]
    spectra = {}
    for s, t in keys:
        rows = np.flatnonzero(buyer_labels == s)
        cols = np.flatnonzero(seller_labels == t)
        if rows.size == 0 or cols.size == 0:
            return None  # empty group: caller redraws
        sym = symmetrize(y[np.ix_(rows, cols)]).entries
        spectra[(s, t)] = _grid_spectra(sym, grid)
    worst = 0.0
    for i, key_a in enumerate(keys):
        for key_b in keys[i + 1 :]:
            worst = max(worst, _spectral_distance(spectra[key_a], spectra[key_b]))
    return worst


def conjunctive_test(y, buyer_groups, seller_groups, pi, a_resamples, seed):
    """Group-comparison test for jointly randomized buyers and sellers.

    For each group pair (s, t) the submatrix of transactions between buyer
    group s and seller group t is symmetrized and thresholded over the
    pooled grid; the statistic is the largest spectral distance between any
    two group pairs.  Resamples redraw every buyer and seller label
    independently (label = Bernoulli(pi) + 1); resampled assignments with
    an empty group are redrawn a bounded number of times.
    """
    ym = as_bipartite_matrix(y).entries
    buyers = np.asarray(buyer_groups, dtype=int)
    sellers = np.asarray(seller_groups, dtype=int)
    if len(buyers) != ym.shape[0]:
        raise ValueError(f"{len(buyers)} buyer labels for {ym.shape[0]} rows")
    if len(sellers) != ym.shape[1]:
        raise ValueError(f"{len(sellers)} seller labels for {ym.shape[1]} columns")
    for name, labels in (("buyer", buyers), ("seller", sellers)):
        if not np.all(np.isin(labels, (1, 2))):
            raise ValueError(f"{name} labels must be in {{1, 2}}")
    if not 0.0 < pi < 1.0:
        raise ValueError(f"pi must be in (0, 1), got {pi}")
    if a_resamples < 1:
        raise ValueError(f"number of resamples must be >= 1, got {a_resamples}")

    grid = _pooled_grid(ym, np.zeros(1))  # symmetrization adds structural zeros
    observed = _conjunctive_statistic(ym, buyers, sellers, grid)
    if observed is None:
        raise ValueError("observed assignment leaves a buyer or seller group empty")

    streams = np.random.SeedSequence(seed).spawn(a_resamples)
    resampled = []
    for index, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        value = None
        for _ in range(MAX_REDRAWS):
            b = (rng.random(len(buyers)) < pi).astype(int) + 1
            s = (rng.random(len(sellers)) < pi).astype(int) + 1
            value = _conjunctive_statistic(ym, b, s, grid)
            if value is not None:
                break
        if value is None:
            raise ValueError(
                f"resample {index}: could not draw nonempty groups in "
                f"{MAX_REDRAWS} attempts (pi = {pi}, sizes {len(buyers)}x{len(sellers)})"
            )
        resampled.append(value)
    return _report(observed, resampled, seed, "conjunctive")


def censored_test(y1, y0, pi, a_resamples, seed):
    """Participation test when only same-treatment pairs are observed.

    The observed statistic compares the treated matrix against the control
    matrix over the pooled grid.  Each resample draws a Bernoulli(pi)
    pseudo-treated subset of the control agents, compares the induced
    principal submatrix of the control matrix against the fixed full
    control spectra, and must contain at least two agents (bounded
    redraws).
    """
    e1 = as_outcome_matrix(y1, arm=1).entries
    e0 = as_outcome_matrix(y0, arm=0).entries
    if not 0.0 < pi < 1.0:
        raise ValueError(f"pi must be in (0, 1), got {pi}")
    if a_resamples < 1:
        raise ValueError(f"number of resamples must be >= 1, got {a_resamples}")
    grid = _pooled_grid(e1, e0)
    control_spectra = _grid_spectra(e0, grid)
    observed = _spectral_distance(_grid_spectra(e1, grid), control_spectra)

    n0 = e0.shape[0]
    streams = np.random.SeedSequence(seed).spawn(a_resamples)
    resampled = []
    for index, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        chosen = None
        for _ in range(MAX_REDRAWS):
            take = np.flatnonzero(rng.random(n0) < pi)
            if take.size >= 2:
                chosen = take
                break
        if chosen is None:
            raise ValueError(
                f"resample {index}: could not draw a pseudo-treated set of size "
                f">= 2 in {MAX_REDRAWS} attempts (pi = {pi}, n0 = {n0})"
            )
        sub = e0[np.ix_(chosen, chosen)]
        resampled.append(
            _spectral_distance(_grid_spectra(sub, grid), control_spectra)
        )
    return _report(observed, resampled, seed, "censored")
