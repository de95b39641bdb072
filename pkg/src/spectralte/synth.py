"""Rank-invariant synthetic experiment generators.

Each generator produces an aligned potential-outcome pair (both arms on the
same agent labeling) plus an observed pair where each arm has been
relabeled by an independent hidden permutation, mimicking what a double
randomized experiment actually reveals.  The aligned pair makes end-to-end
identification tests possible: under rank invariance the multiset of
spectral-treatment-effect entries recovers the multiset of true pairwise
effects.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .spectra import OutcomeMatrix, as_outcome_matrix
from .ste import rank_invariance_check


@dataclass(frozen=True)
class GeneratedExperiment:
    """Aligned and scrambled outcome pairs with the hidden relabelings."""

    y1_star: OutcomeMatrix
    y0_star: OutcomeMatrix
    y1_obs: OutcomeMatrix
    y0_obs: OutcomeMatrix
    perm_treated: np.ndarray
    perm_control: np.ndarray
    g_description: str
    rank_invariant: bool

    @property
    def n(self):
        return self.y1_star.n


def _scramble(entries, perm):
    return entries[np.ix_(perm, perm)]


def _package(y1_star, y0_star, seed, g_description, rank_invariant):
    y1s = as_outcome_matrix(y1_star, arm=1)
    y0s = as_outcome_matrix(y0_star, arm=0)
    rng = np.random.default_rng(seed)
    p1 = rng.permutation(y1s.n)
    p0 = rng.permutation(y0s.n)
    return GeneratedExperiment(
        y1_star=y1s,
        y0_star=y0s,
        y1_obs=OutcomeMatrix(_scramble(y1s.entries, p1), arm=1),
        y0_obs=OutcomeMatrix(_scramble(y0s.entries, p0), arm=0),
        perm_treated=p1,
        perm_control=p0,
        g_description=g_description,
        rank_invariant=rank_invariant,
    )


def _check_adjacency(g):
    a = np.asarray(g, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"adjacency matrix must be square, got {a.shape}")
    if not np.array_equal(a, a.T):
        raise ValueError("adjacency matrix must be symmetric")
    if not np.all((a == 0) | (a == 1)):
        raise ValueError("adjacency matrix must be binary")
    if np.any(np.diag(a) != 0):
        raise ValueError("adjacency matrix must have a zero diagonal")
    return a


def gen_diffusion(g, alpha0, alpha1, t_periods, seed=0):
    """Information diffusion on a network: outcomes are expected receipt counts.

    Y_s = sum_{t=1..T} alpha_s^t G^t, a polynomial in the adjacency matrix,
    so both arms share G's eigenvectors.  For T > 2 the transmission
    probabilities must satisfy alpha1 < (1/T)^(1/(T-2)) for the eigenvalue
    map to be nondecreasing; there is no tractable closed form for the map,
    so rank invariance is certified numerically on the aligned pair.
    """
    adj = _check_adjacency(g)
    t_periods = int(t_periods)
    if t_periods < 1:
        raise ValueError(f"number of periods must be >= 1, got {t_periods}")
    condition_ok = 0.0 < alpha0 < alpha1
    if t_periods > 2:
        condition_ok = condition_ok and alpha1 < (1.0 / t_periods) ** (
            1.0 / (t_periods - 2)
        )

    def accumulate(alpha):
        power = np.eye(adj.shape[0])
        out = np.zeros_like(adj)
        for t in range(1, t_periods + 1):
            power = power @ adj
            out = out + alpha**t * power
        return out

    y0 = accumulate(alpha0)
    y1 = accumulate(alpha1)
    if condition_ok:
        invariant = rank_invariance_check(y1, y0).invariant
    else:
        warnings.warn(
            "transmission probabilities violate the monotone eigenvalue-map "
            "condition; generated pair marked not rank invariant",
            stacklevel=2,
        )
        invariant = False
    desc = (
        f"eigenvalue map lambda -> sum_t a^t lambda^t with a0={alpha0}, "
        f"a1={alpha1}, T={t_periods} (no closed form for T > 1)"
    )
    return _package(y1, y0, seed, desc, invariant)


def gen_social(g, beta0, beta1, sigma2, seed=0):
    """Equilibrium action covariances under peer effects on a network.

    Y_s = sigma2 * (I - beta_s G)^-2 shares eigenvectors with G; the
    eigenvalue map x -> sigma2 * (1 - (beta1/beta0) * (1 - sqrt(sigma2/x)))^-2
    is nondecreasing on the admissible range.
    """
    adj = _check_adjacency(g)
    if not 0.0 < beta0 < beta1:
        raise ValueError(f"need 0 < beta0 < beta1, got {beta0}, {beta1}")
    if sigma2 <= 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    radius = float(np.max(np.abs(np.linalg.eigvalsh(adj)))) if adj.size else 0.0
    if radius > 0 and beta1 >= 1.0 / radius:
        raise ValueError(
            f"beta1 = {beta1} must be below 1/spectral radius = {1.0 / radius:.6g} "
            "for a unique equilibrium"
        )
    eye = np.eye(adj.shape[0])

    def outcome(beta):
        inv = np.linalg.inv(eye - beta * adj)
        return sigma2 * inv @ inv

    desc = (
        f"g(x) = s2*(1 - (b1/b0)*(1 - sqrt(s2/x)))^-2 with b0={beta0}, "
        f"b1={beta1}, s2={sigma2}"
    )
    return _package(outcome(beta1), outcome(beta0), seed, desc, True)


def gen_linkformation(x, beta0, beta1, seed=0):
    """Homophily-driven link formation: doubly demeaned logit-scale surplus.

    The outcome is 2 * beta_s * Xc where Xc is the double-centered Gram
    matrix of the characteristics, so the arms differ by the scalar factor
    beta1/beta0 and the eigenvalue map is linear.
    """
    xm = np.asarray(x, dtype=float)
    if xm.ndim == 1:
        xm = xm[:, None]
    if not 0.0 < beta0 <= beta1:  # equal betas give identical arms, a valid null
        raise ValueError(f"need 0 < beta0 <= beta1, got {beta0}, {beta1}")
    gram = xm @ xm.T
    row = gram.mean(axis=1, keepdims=True)
    col = gram.mean(axis=0, keepdims=True)
    centered = gram - row - col + gram.mean()
    desc = f"g(x) = (b1/b0) x with b0={beta0}, b1={beta1} (linear)"
    return _package(2.0 * beta1 * centered, 2.0 * beta0 * centered, seed, desc, True)


def gen_factor(loadings, sigma2, rho0, rho1, seed=0):
    """Factor-model covariance shift on the rotated (factor-space) scale.

    With orthogonal loading columns, scaling every idiosyncratic variance by
    rho_s yields the rotated outcome rho_s * L' diag(sigma2) L, so the
    eigenvalue map is linear.
    """
    lam = np.asarray(loadings, dtype=float)
    if lam.ndim != 2:
        raise ValueError(f"loadings must be 2-d, got shape {lam.shape}")
    s2 = np.asarray(sigma2, dtype=float).ravel()
    if len(s2) != lam.shape[0]:
        raise ValueError(f"{len(s2)} variances for {lam.shape[0]} assets")
    if np.any(s2 <= 0):
        raise ValueError("idiosyncratic variances must be positive")
    if not 0.0 < rho0 <= rho1:  # equal scalings give identical arms, a valid null
        raise ValueError(f"need 0 < rho0 <= rho1, got {rho0}, {rho1}")
    gram = lam.T @ lam
    off = gram - np.diag(np.diag(gram))
    scale = max(1.0, float(np.max(np.abs(np.diag(gram)))))
    if np.max(np.abs(off)) > 1e-8 * scale:
        raise ValueError("loading columns must be orthogonal")
    core = lam.T @ (s2[:, None] * lam)
    desc = f"g(x) = (r1/r0) x with r0={rho0}, r1={rho1} (linear)"
    return _package(rho1 * core, rho0 * core, seed, desc, True)
