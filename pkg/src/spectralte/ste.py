"""Spectral treatment effects: diagonalized eigenvalue differences expanded
in a chosen orthonormal basis, the matrix lift of scalar functions, the
matrix rank-invariance check, and counterfactual weight matrices (both the
orthogonal weights implied by the eigenbases and a doubly stochastic,
non-extrapolative alternative).

Outputs are matrix-scale: entries are directly comparable to Y1 - Y0.  The
function-scale normalizations (eigenvalue / n, eigenvector * sqrt(n))
cancel inside the outer products, so no scale knob is exposed.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .spectra import as_outcome_matrix, eig_sorted

EIGENGAP_WARN = 1e-8


def _equal_size(y1, y0):
    y1 = as_outcome_matrix(y1, arm=1)
    y0 = as_outcome_matrix(y0, arm=0)
    if y1.n != y0.n:
        raise ValueError(f"arms must have equal size, got {y1.n} and {y0.n}")
    return y1, y0


def _check_orthonormal(basis, tol=1e-8):
    b = np.asarray(basis, dtype=float)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValueError(f"basis must be square, got shape {b.shape}")
    gram = b.T @ b
    err = float(np.max(np.abs(gram - np.eye(b.shape[0]))))
    if err > tol:
        raise ValueError(f"basis columns are not orthonormal: max |B'B - I| = {err:.3g}")
    return b


@dataclass(frozen=True)
class SteMatrix:
    """Matrix of pairwise treatment effects in a chosen orthonormal basis."""

    entries: np.ndarray
    basis_tag: str
    eigengap_warning: bool = False

    @property
    def n(self):
        return self.entries.shape[0]

    def frobenius(self):
        return float(np.linalg.norm(self.entries))


def _min_gap(values):
    v = np.sort(np.asarray(values))
    return float(np.min(np.diff(v))) if len(v) > 1 else np.inf


def ste(y1, y0, basis, basis_tag="custom"):
    """Eigenvalue differences expanded in an arbitrary orthonormal basis.

    entries = sum_r (matrix eigenvalue gap at rank r) * b_r b_r', with both
    spectra signed-descending.  The Frobenius norm is basis-independent.
    """
    y1, y0 = _equal_size(y1, y0)
    b = _check_orthonormal(basis)
    if b.shape[0] != y1.n:
        raise ValueError(f"basis size {b.shape[0]} does not match arms of size {y1.n}")
    s1 = eig_sorted(y1.entries)
    s0 = eig_sorted(y0.entries)
    diff = (s1.values - s0.values) * y1.n  # back to matrix scale
    entries = (b * diff) @ b.T
    warn = min(_min_gap(s1.values * y1.n), _min_gap(s0.values * y0.n)) < EIGENGAP_WARN
    return SteMatrix(entries=entries, basis_tag=basis_tag, eigengap_warning=warn)


def _ste_in_arm_basis(y1, y0, basis_arm):
    y1, y0 = _equal_size(y1, y0)
    s1 = eig_sorted(y1.entries)
    s0 = eig_sorted(y0.entries)
    n = y1.n
    diff = (s1.values - s0.values) * n
    basis_spec = s1 if basis_arm == "treated" else s0
    entries = (basis_spec.vectors * diff) @ basis_spec.vectors.T
    warn = _min_gap(basis_spec.values * n) < EIGENGAP_WARN
    return SteMatrix(entries=entries, basis_tag=basis_arm, eigengap_warning=warn)


def stt(y1, y0):
    """Effects on the treated: treated-arm eigenvectors carry the eigenvalue gaps.

    Equivalently Y1 minus the counterfactual built from Y1's eigenvectors
    and Y0's eigenvalues.
    """
    return _ste_in_arm_basis(y1, y0, "treated")


def stu(y1, y0):
    """Effects on the untreated: control-arm eigenvectors carry the gaps."""
    return _ste_in_arm_basis(y1, y0, "untreated")


def counterfactual_weights(y1, y0):
    """Orthogonal weight matrix W with stt = Y1 - W Y0 W'.

    W[u, s] = sum_r phi_r1[u] phi_r0[s] pairs the two eigenbases rank by
    rank.  Rows need not be nonnegative nor sum to one; see
    non_extrapolative_weights for the restricted version.
    """
    y1, y0 = _equal_size(y1, y0)
    s1 = eig_sorted(y1.entries)
    s0 = eig_sorted(y0.entries)
    return s1.vectors @ s0.vectors.T


def matrix_lift(g, y):
    """Apply a scalar function to a symmetric matrix through its spectrum.

    Returns sum_r g(matrix eigenvalue_r) * v_r v_r', which agrees with the
    power-series definition of a matrix function on its domain.
    """
    ym = as_outcome_matrix(y)
    spec = eig_sorted(ym.entries)
    matrix_vals = spec.values * ym.n
    lifted = np.empty_like(matrix_vals)
    for i, x in enumerate(matrix_vals):
        try:
            with np.errstate(invalid="ignore"):
                gx = float(g(float(x)))
        except Exception as exc:
            raise ValueError(f"function undefined at eigenvalue {x}: {exc}") from exc
        if not np.isfinite(gx):
            raise ValueError(f"function not finite at eigenvalue {x} (got {gx})")
        lifted[i] = gx
    entries = (spec.vectors * lifted) @ spec.vectors.T
    return as_outcome_matrix(entries, arm=ym.arm)


@dataclass(frozen=True)
class RankInvarianceReport:
    """Diagnostics for the shared-eigenvector, monotone-eigenvalue-map check."""

    invariant: bool
    max_eigenvector_misalignment: float
    g_monotonicity_violation: float
    eigengap_warning: bool


def _clusters(values, tol):
    """Group consecutive sorted eigenvalues whose gap is below tol."""
    groups = [[0]]
    for r in range(1, len(values)):
        if values[r - 1] - values[r] < tol:
            groups[-1].append(r)
        else:
            groups.append([r])
    return groups


def rank_invariance_check(y1, y0, tol=1e-8):
    """Check whether Y1 looks like a nondecreasing spectral map of Y0.

    Diagonalizes Y1 in Y0's eigenbasis (eigenvalues signed-descending).
    Rank invariance requires (a) the induced Y1 eigenvalues to be monotone
    in Y0's, and (b) Y1's eigenspaces to align with Y0's cluster by
    cluster; the worst principal-angle sine and the worst monotonicity
    violation are reported.
    """
    y1, y0 = _equal_size(y1, y0)
    s0 = eig_sorted(y0.entries)
    s1 = eig_sorted(y1.entries)
    n = y0.n
    mu = s0.values * n  # control-arm matrix eigenvalues, descending
    induced = np.einsum(
        "ir,ij,jr->r", s0.vectors, y1.entries, s0.vectors
    )  # diag of V0' Y1 V0

    groups = _clusters(mu, tol)
    misalignment = 0.0
    for grp in groups:
        sub0 = s0.vectors[:, grp]
        sub1 = s1.vectors[:, grp]
        # spectral norm of the projector difference = sine of the largest
        # principal angle, computed without the cos -> sin cancellation
        proj_gap = sub0 @ sub0.T - sub1 @ sub1.T
        sine = float(np.linalg.norm(proj_gap, ord=2))
        misalignment = max(misalignment, min(sine, 1.0))

    violation = 0.0
    for r in range(n - 1):
        if mu[r] - mu[r + 1] >= tol:  # no ordering constraint inside a cluster
            violation = max(violation, float(induced[r + 1] - induced[r]))

    gap_warning = _min_gap(mu) < max(tol, EIGENGAP_WARN)
    return RankInvarianceReport(
        invariant=bool(misalignment <= tol and violation <= tol),
        max_eigenvector_misalignment=misalignment,
        g_monotonicity_violation=violation,
        eigengap_warning=bool(gap_warning),
    )


def hw_gap(y1, y0):
    """(spectral gap, entrywise gap): sum of squared eigenvalue differences
    versus squared Frobenius distance, both at function scale.

    The first never exceeds the second (eigenvalue perturbation bound);
    equality holds when the arms commute and are co-sorted.
    """
    y1, y0 = _equal_size(y1, y0)
    n = y1.n
    v1 = eig_sorted(y1.entries).values
    v0 = eig_sorted(y0.entries).values
    lhs = float(np.sum((v1 - v0) ** 2))
    rhs = float(np.sum((y1.entries - y0.entries) ** 2)) / n**2
    return lhs, rhs


@dataclass(frozen=True)
class WeightFitResult:
    """Doubly stochastic weights with the residual objective and its history."""

    weights: np.ndarray
    objective: float
    objectives: np.ndarray
    iterations: int
    converged: bool


def _residual_objective(d, y1, y0):
    e = y1 - d @ y0 @ d.T
    return float(np.sum(e * e))


def _line_search_quartic(e0, a1, a2):
    """Exact minimizer over [0, 1] of ||e0 - g*a1 - g^2*a2||_F^2."""
    c1 = -2.0 * float(np.sum(e0 * a1))
    c2 = float(np.sum(a1 * a1)) - 2.0 * float(np.sum(e0 * a2))
    c3 = 2.0 * float(np.sum(a1 * a2))
    c4 = float(np.sum(a2 * a2))

    def value(g):
        return ((c4 * g + c3) * g + c2) * g * g + c1 * g

    candidates = [0.0, 1.0]
    roots = np.roots([4.0 * c4, 3.0 * c3, 2.0 * c2, c1])
    for root in roots:
        if abs(root.imag) < 1e-12 and 0.0 < root.real < 1.0:
            candidates.append(float(root.real))
    return min(candidates, key=value)


def non_extrapolative_weights(y1, y0, max_iter=500, tol=1e-8):
    """Doubly stochastic weights minimizing ||Y1 - D Y0 D'||_F^2.

    Conditional-gradient (Frank-Wolfe) iteration starting at the identity:
    the linear subproblem over the polytope of doubly stochastic matrices is
    attained at a permutation (vertex), found exactly by linear assignment;
    an exact quartic line search keeps the objective nonincreasing, and
    iterates stay doubly stochastic as convex combinations of permutations.
    """
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1, got {max_iter}")
    y1m, y0m = _equal_size(y1, y0)
    a1, a0 = y1m.entries, y0m.entries
    n = a1.shape[0]
    d = np.eye(n)
    history = [_residual_objective(d, a1, a0)]
    converged = False
    for _ in range(max_iter):
        e = a1 - d @ a0 @ d.T
        grad = -4.0 * e @ d @ a0
        rows, cols = linear_sum_assignment(grad)
        s = np.zeros_like(d)
        s[rows, cols] = 1.0
        delta = s - d
        a1_term = delta @ a0 @ d.T + d @ a0 @ delta.T
        a2_term = delta @ a0 @ delta.T
        gamma = _line_search_quartic(e, a1_term, a2_term)
        d = d + gamma * delta
        obj = _residual_objective(d, a1, a0)
        prev = history[-1]
        history.append(obj)
        if prev - obj <= tol * max(1.0, prev):
            converged = True
            break
    return WeightFitResult(
        weights=d,
        objective=history[-1],
        objectives=np.asarray(history),
        iterations=len(history) - 1,
        converged=converged,
    )
