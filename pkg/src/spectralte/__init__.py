"""Eigenvalue bounds and spectral treatment effects for double randomized
experiments with outcome matrices."""

__version__ = "0.1.0"

from .bipartite import (
    BipartiteMatrix,
    bipartite_cell_bounds,
    bipartite_cell_unmap,
    bipartite_dpo_bounds,
    symmetrize,
)
from .bounds import (
    DteCurve,
    IntervalBound,
    binary_cell_bounds,
    dpo_bounds,
    dte_bounds,
    dte_curve,
    weighted_average_bounds,
)
from .hetero import (
    AdditiveDecomposition,
    decompose_additive,
    dpo_bounds_hetero,
    dte_bounds_hetero,
    ste_hetero,
)
from .oracle import SharpInterval, bipartite_sharp_dpo, brute_dte_sharp, qap_sharp_dpo
from .randtest import (
    TestReport,
    censored_test,
    conjunctive_test,
    eig_distance_stat,
    matched_pair_test,
)
from .scalar import OutcomeVector, binned_cate, fh_bounds, makarov_bounds, qte
from .smooth import (
    ONE_SIDED_QUINTIC,
    SYMMETRIC_QUARTIC,
    SmoothKernel,
    default_bandwidth,
    smooth_kernel,
    smoothed_dpo_bounds,
    smoothed_eig_product,
    smoothed_ste_cdf,
)
from .spectra import (
    IndicatorMatrix,
    OutcomeMatrix,
    Spectrum,
    eig_dot,
    eig_sorted,
    indicator,
    threshold_grid,
)
from .ste import (
    RankInvarianceReport,
    SteMatrix,
    WeightFitResult,
    counterfactual_weights,
    hw_gap,
    matrix_lift,
    non_extrapolative_weights,
    rank_invariance_check,
    ste,
    stt,
    stu,
)
from .synth import (
    GeneratedExperiment,
    gen_diffusion,
    gen_factor,
    gen_linkformation,
    gen_social,
)

__all__ = [name for name in dir() if not name.startswith("_")]
