"""Two-population (row agents vs column agents) outcome matrices.

A rectangular outcome matrix is embedded in the symmetric block matrix
[[0, B], [B', 0]] over the pooled population, whose spectrum is the plus
and minus singular values of B.  Joint-mass bounds computed on the
symmetrized pair live on the pooled (n_rows + n_cols)^2 grid; mapping them
back to the bipartite scale removes the deterministic contribution of the
zero diagonal blocks and rescales to the 2 * n_rows * n_cols informative
cells.
"""

from dataclasses import dataclass

import numpy as np

from .bounds import IntervalBound, _clip01, dpo_bounds
from .hetero import dpo_bounds_hetero
from .spectra import OutcomeMatrix


@dataclass(frozen=True)
class BipartiteMatrix:
    """Rectangular outcome matrix between two populations."""

    entries: np.ndarray
    arm: int = 1

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError(f"bipartite matrix must be 2-d and nonempty, got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("bipartite matrix contains non-finite entries")
        object.__setattr__(self, "entries", a)

    @property
    def n_rows(self):
        return self.entries.shape[0]

    @property
    def n_cols(self):
        return self.entries.shape[1]


def as_bipartite_matrix(b, arm=1):
    if isinstance(b, BipartiteMatrix):
        return b
    return BipartiteMatrix(np.asarray(b, dtype=float), arm=arm)


def symmetrize(b):
    """Embed a rectangular matrix as the symmetric block matrix [[0, B], [B', 0]].

    The result is an OutcomeMatrix of size n_rows + n_cols whose eigenvalues
    are the singular values of B with both signs (zero-padded).
    """
    bm = as_bipartite_matrix(b)
    nr, nc = bm.n_rows, bm.n_cols
    block = np.zeros((nr + nc, nr + nc))
    block[:nr, nr:] = bm.entries
    block[nr:, :nr] = bm.entries.T
    return OutcomeMatrix(block, arm=bm.arm)


def bipartite_cell_unmap(f_dagger_bound, t1, t0, n_rows, n_cols):
    """Map a joint-mass bound on the symmetrized pair back to bipartite scale.

    Of the (n_rows + n_cols)^2 pooled cells, the diagonal blocks hold
    structural zeros in both arms and contribute exactly when both
    thresholds are >= 0; the remaining 2 * n_rows * n_cols cells carry each
    bipartite pair twice.
    """
    if n_rows < 1 or n_cols < 1:
        raise ValueError("populations must be nonempty")
    total = (n_rows + n_cols) ** 2
    diag_cells = n_rows**2 + n_cols**2
    diag_mass = float(diag_cells) if (t1 >= 0 and t0 >= 0) else 0.0

    def unmap(endpoint):
        return _clip01((endpoint * total - diag_mass) / (2.0 * n_rows * n_cols))

    return IntervalBound(
        lower=unmap(f_dagger_bound.lower), upper=unmap(f_dagger_bound.upper)
    )


def bipartite_dpo_bounds(b1, b0, t1, t0, hetero_mode=None):
    """Joint-mass bracket for a bipartite outcome pair.

    Both arms are symmetrized, bounded on the pooled population (plain
    eigenvalue bracket, or the heterogeneity-adjusted one when a mode is
    given), and mapped back to the bipartite scale.
    """
    b1 = as_bipartite_matrix(b1, arm=1)
    b0 = as_bipartite_matrix(b0, arm=0)
    if b1.entries.shape != b0.entries.shape:
        raise ValueError(
            f"arms must have equal shape, got {b1.entries.shape} and {b0.entries.shape}"
        )
    s1 = symmetrize(b1)
    s0 = symmetrize(b0)
    if hetero_mode is None:
        pooled = dpo_bounds(s1, s0, t1, t0)
    else:
        pooled = dpo_bounds_hetero(s1, s0, t1, t0, hetero_mode)
    return bipartite_cell_unmap(pooled, t1, t0, b1.n_rows, b1.n_cols)


def bipartite_cell_bounds(b1, b0, hetero_mode=None):
    """Four joint-cell bounds for a binary bipartite pair.

    The (0, 0) cell is the unmapped joint mass at thresholds (0, 0); the
    rest follow from the marginal zero fractions by inclusion-exclusion.
    """
    b1 = as_bipartite_matrix(b1, arm=1)
    b0 = as_bipartite_matrix(b0, arm=0)
    for name, b in (("treated", b1), ("control", b0)):
        if not np.all((b.entries == 0) | (b.entries == 1)):
            raise ValueError(f"{name} matrix must be binary for cell bounds")
    base = bipartite_dpo_bounds(b1, b0, 0.0, 0.0, hetero_mode)
    f1 = float(np.mean(b1.entries == 0))
    f0 = float(np.mean(b0.entries == 0))
    lo, up = base.lower, base.upper

    def cell(lo_, up_):
        return IntervalBound(lower=_clip01(lo_), upper=_clip01(up_))

    return {
        (0, 0): cell(lo, up),
        (0, 1): cell(f1 - up, f1 - lo),
        (1, 0): cell(f0 - up, f0 - lo),
        (1, 1): cell(1.0 - f1 - f0 + lo, 1.0 - f1 - f0 + up),
    }
