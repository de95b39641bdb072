"""Request-to-result handlers shared by the HTTP app and the CLI.

Each handler turns a validated request model into a ResultDocument; the
service returns the document as a JSON body, the CLI writes the identical
document to a file.  Domain failures surface as ValueError.
"""

import secrets

import numpy as np

from .. import bipartite as bip
from .. import bounds, hetero, oracle, randtest, smooth, synth
from ..io_formats import ResultDocument, density_grid, inputs_digest
from ..spectra import indicator
from ..ste import stt, stu
from . import schemas


def _new_seed():
    return secrets.randbits(63)


def _jsonable(obj):
    """Deep-convert numpy containers so documents serialize anywhere."""
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _bound_payload(b):
    payload = {"lower": b.lower, "upper": b.upper}
    if b.binding_lower is not None:
        payload["binding_lower"] = b.binding_lower
        payload["binding_upper"] = b.binding_upper
    return payload


def _cells_payload(cells):
    order = [(1, 1), (1, 0), (0, 1), (0, 0)]
    return [
        {"cell": f"({a},{b})", "lower": cells[(a, b)].lower, "upper": cells[(a, b)].upper}
        for a, b in order
    ]


def _document(kind, arrays, params, payload):
    params = _jsonable(params)
    return ResultDocument(
        kind=kind,
        inputs_digest=inputs_digest(arrays=arrays, params=params),
        parameters=params,
        payload=_jsonable(payload),
    )


def handle_dpo(req: schemas.DpoRequest) -> ResultDocument:
    bound = bounds.dpo_bounds(req.y1, req.y0, req.t1, req.t0, req.exclude_diagonal)
    params = {"t1": req.t1, "t0": req.t0, "exclude_diagonal": req.exclude_diagonal}
    return _document("dpo_bounds", [req.y1, req.y0], params, _bound_payload(bound))


def handle_dte(req: schemas.DteRequest) -> ResultDocument:
    if req.y is not None:
        bound = bounds.dte_bounds(req.y1, req.y0, req.y, req.exclude_diagonal)
        params = {"y": req.y, "exclude_diagonal": req.exclude_diagonal}
        return _document("dte_bounds", [req.y1, req.y0], params, _bound_payload(bound))
    curve = bounds.dte_curve(
        req.y1, req.y0, req.grid, req.monotonize, req.exclude_diagonal
    )
    params = {
        "grid": list(req.grid),
        "monotonize": req.monotonize,
        "exclude_diagonal": req.exclude_diagonal,
    }
    payload = {
        "grid": curve.grid,
        "lower": curve.lower,
        "upper": curve.upper,
        "monotonized": curve.monotonized,
    }
    return _document("dte_curve", [req.y1, req.y0], params, payload)


def handle_cells(req: schemas.CellsRequest) -> ResultDocument:
    per_village = []
    for pair in req.pairs:
        if req.hetero_mode is None:
            cells = bounds.binary_cell_bounds(pair.y1, pair.y0, req.exclude_diagonal)
        else:
            cells = _hetero_cells(
                pair.y1, pair.y0, req.hetero_mode, req.exclude_diagonal
            )
        per_village.append(cells)
    weights = req.weights if req.weights is not None else [1.0] * len(per_village)
    if len(weights) != len(per_village):
        raise ValueError(f"{len(per_village)} pairs but {len(weights)} weights")
    averaged = {
        key: bounds.weighted_average_bounds([c[key] for c in per_village], weights)
        for key in ((1, 1), (1, 0), (0, 1), (0, 0))
    }
    params = {
        "villages": len(per_village),
        "weights": [float(w) for w in weights],
        "exclude_diagonal": req.exclude_diagonal,
        "hetero_mode": req.hetero_mode,
    }
    payload = {
        "cells": _cells_payload(averaged),
        "per_village": [_cells_payload(c) for c in per_village],
    }
    arrays = [m for pair in req.pairs for m in (pair.y1, pair.y0)]
    return _document("cell_bounds", arrays, params, payload)


def _hetero_cells(y1, y0, mode, exclude_diagonal=False):
    """Binary cell bounds with the heterogeneity-adjusted joint-mass bracket."""
    e1 = bounds._require_binary(y1, "treated matrix")
    e0 = bounds._require_binary(y0, "control matrix")
    base = hetero.dpo_bounds_hetero(y1, y0, 0.0, 0.0, mode, exclude_diagonal)
    if exclude_diagonal:
        off1 = ~np.eye(e1.shape[0], dtype=bool)
        off0 = ~np.eye(e0.shape[0], dtype=bool)
        f1 = float(np.mean((e1 == 0) & off1))
        f0 = float(np.mean((e0 == 0) & off0))
    else:
        f1 = float(np.mean(e1 == 0))
        f0 = float(np.mean(e0 == 0))
    lo, up = base.lower, base.upper
    clip = bounds._clip01

    def cell(a, b):
        return bounds.IntervalBound(lower=clip(a), upper=clip(b))

    return {
        (0, 0): cell(lo, up),
        (0, 1): cell(f1 - up, f1 - lo),
        (1, 0): cell(f0 - up, f0 - lo),
        (1, 1): cell(1.0 - f1 - f0 + lo, 1.0 - f1 - f0 + up),
    }


def handle_ste(req: schemas.SteRequest) -> ResultDocument:
    fn = stt if req.basis == "treated" else stu
    result = fn(req.y1, req.y0)
    params = {"basis": req.basis}
    payload = {
        "entries": result.entries,
        "frobenius": result.frobenius(),
        "eigengap_warning": result.eigengap_warning,
        "basis_tag": result.basis_tag,
    }
    return _document("ste_matrix", [req.y1, req.y0], params, payload)


def handle_hetero(req: schemas.HeteroRequest) -> ResultDocument:
    arrays = [req.y1, req.y0]
    if req.op == "dpo":
        bound = hetero.dpo_bounds_hetero(
            req.y1, req.y0, req.t1, req.t0, req.mode, req.exclude_diagonal
        )
        params = {
            "t1": req.t1,
            "t0": req.t0,
            "mode": req.mode,
            "exclude_diagonal": req.exclude_diagonal,
        }
        return _document("hetero_dpo_bounds", arrays, params, _bound_payload(bound))
    if req.op == "dte":
        bound = hetero.dte_bounds_hetero(
            req.y1, req.y0, req.y, req.mode, req.exclude_diagonal
        )
        params = {
            "y": req.y,
            "mode": req.mode,
            "exclude_diagonal": req.exclude_diagonal,
        }
        return _document("hetero_dte_bounds", arrays, params, _bound_payload(bound))
    result = hetero.ste_hetero(req.y1, req.y0, req.basis)
    params = {"basis": req.basis, "mode": req.mode}
    payload = {
        "entries": result.entries,
        "frobenius": result.frobenius(),
        "eigengap_warning": result.eigengap_warning,
        "basis_tag": result.basis_tag,
    }
    return _document("hetero_ste_matrix", arrays, params, payload)


def handle_bipartite(req: schemas.BipartiteRequest) -> ResultDocument:
    arrays = [req.b1, req.b0]
    if req.op == "dpo":
        bound = bip.bipartite_dpo_bounds(
            req.b1, req.b0, req.t1, req.t0, req.hetero_mode
        )
        params = {"t1": req.t1, "t0": req.t0, "hetero_mode": req.hetero_mode}
        return _document(
            "bipartite_dpo_bounds", arrays, params, _bound_payload(bound)
        )
    cells = bip.bipartite_cell_bounds(req.b1, req.b0, req.hetero_mode)
    params = {"hetero_mode": req.hetero_mode}
    payload = {"cells": _cells_payload(cells)}
    return _document("bipartite_cell_bounds", arrays, params, payload)


def handle_randtest(req: schemas.RandTestRequest) -> ResultDocument:
    seed = req.seed if req.seed is not None else _new_seed()
    if req.design == "matched":
        report = randtest.matched_pair_test(
            [(p.y1, p.y0) for p in req.pairs], req.resamples, seed
        )
        arrays = [m for p in req.pairs for m in (p.y1, p.y0)]
        params = {"design": "matched", "resamples": req.resamples, "seed": seed}
    elif req.design == "conjunctive":
        report = randtest.conjunctive_test(
            req.y, req.buyer_groups, req.seller_groups, req.pi, req.resamples, seed
        )
        arrays = [req.y]
        params = {
            "design": "conjunctive",
            "pi": req.pi,
            "resamples": req.resamples,
            "seed": seed,
        }
    else:
        report = randtest.censored_test(req.y1, req.y0, req.pi, req.resamples, seed)
        arrays = [req.y1, req.y0]
        params = {
            "design": "censored",
            "pi": req.pi,
            "resamples": req.resamples,
            "seed": seed,
        }
    payload = {
        "statistic": report.statistic,
        "p_value": report.p_value,
        "resampled": report.resampled,
        "seed": report.seed,
        "design": report.design,
    }
    return _document("randomization_test", arrays, params, payload)


def handle_smooth(req: schemas.SmoothRequest) -> ResultDocument:
    h = req.bandwidth
    if h is None:
        h = smooth.default_bandwidth(req.y1, req.y0)
    kernel = req.kernel
    if kernel is None:
        kernel = "symmetricQuartic" if req.op == "cdf" else "oneSidedQuintic"
    arrays = [req.y1, req.y0]
    if req.op == "product":
        value = smooth.smoothed_eig_product(req.y1, req.y0, req.t1, req.t0, h, kernel)
        params = {"t1": req.t1, "t0": req.t0, "bandwidth": h, "kernel": kernel}
        return _document("smoothed_eig_product", arrays, params, {"value": value})
    if req.op == "dpo":
        bound = smooth.smoothed_dpo_bounds(req.y1, req.y0, req.t1, req.t0, h, kernel)
        params = {"t1": req.t1, "t0": req.t0, "bandwidth": h, "kernel": kernel}
        return _document(
            "smoothed_dpo_bounds", arrays, params, _bound_payload(bound)
        )
    value = smooth.smoothed_ste_cdf(req.y1, req.y0, req.basis, req.y, h, kernel)
    params = {
        "y": req.y,
        "basis": req.basis,
        "bandwidth": h,
        "kernel": kernel,
    }
    return _document("smoothed_ste_cdf", arrays, params, {"value": value})


def _er_graph(n, edge_prob, rng):
    upper = rng.random((n, n)) < edge_prob
    adj = np.triu(upper, 1)
    return (adj + adj.T).astype(float)


def handle_synth(req: schemas.SynthRequest) -> ResultDocument:
    seed = req.seed if req.seed is not None else _new_seed()
    root = np.random.SeedSequence(seed)
    input_stream, perm_stream = root.spawn(2)
    rng = np.random.default_rng(input_stream)
    if req.generator == "diffusion":
        adj = (
            np.asarray(req.adjacency, dtype=float)
            if req.adjacency is not None
            else _er_graph(req.n, req.edge_prob, rng)
        )
        exp = synth.gen_diffusion(
            adj, req.alpha0, req.alpha1, req.periods, seed=perm_stream
        )
        knobs = {"alpha0": req.alpha0, "alpha1": req.alpha1, "periods": req.periods}
    elif req.generator == "social":
        adj = (
            np.asarray(req.adjacency, dtype=float)
            if req.adjacency is not None
            else _er_graph(req.n, req.edge_prob, rng)
        )
        exp = synth.gen_social(
            adj, req.beta0, req.beta1, req.noise_scale, seed=perm_stream
        )
        knobs = {
            "beta0": req.beta0,
            "beta1": req.beta1,
            "noise_scale": req.noise_scale,
        }
    elif req.generator == "linkformation":
        x = (
            np.asarray(req.characteristics, dtype=float)
            if req.characteristics is not None
            else rng.normal(size=(req.n, 3))
        )
        exp = synth.gen_linkformation(x, req.beta0, req.beta1, seed=perm_stream)
        knobs = {"beta0": req.beta0, "beta1": req.beta1}
    else:
        if req.loadings is not None:
            lam = np.asarray(req.loadings, dtype=float)
        else:
            basis, _ = np.linalg.qr(rng.normal(size=(req.n, req.n)))
            lam = basis[:, : req.n_factors] * rng.uniform(1.0, 2.0, req.n_factors)
        s2 = (
            np.asarray(req.sigma2, dtype=float)
            if req.sigma2 is not None
            else rng.uniform(0.5, 1.5, lam.shape[0])
        )
        exp = synth.gen_factor(lam, s2, req.rho0, req.rho1, seed=perm_stream)
        knobs = {"rho0": req.rho0, "rho1": req.rho1, "n_factors": req.n_factors}
    params = {"generator": req.generator, "seed": seed, "n": req.n, **knobs}
    payload = {
        "y1_obs": exp.y1_obs.entries,
        "y0_obs": exp.y0_obs.entries,
        "g_description": exp.g_description,
        "rank_invariant": exp.rank_invariant,
    }
    if req.include_aligned:
        payload.update(
            {
                "y1_star": exp.y1_star.entries,
                "y0_star": exp.y0_star.entries,
                "perm_treated": exp.perm_treated,
                "perm_control": exp.perm_control,
            }
        )
    return _document("synthetic_experiment", [], params, payload)


def handle_oracle(req: schemas.OracleRequest) -> ResultDocument:
    arrays = [req.y1, req.y0]
    if req.op == "dpo":
        interval = oracle.qap_sharp_dpo(
            indicator(req.y1, req.t1), indicator(req.y0, req.t0)
        )
        params = {"op": "dpo", "t1": req.t1, "t0": req.t0}
    elif req.op == "dte":
        interval = oracle.brute_dte_sharp(req.y1, req.y0, req.y)
        params = {"op": "dte", "y": req.y}
    else:
        a1 = (np.asarray(req.y1, dtype=float) <= req.t1).astype(float)
        a0 = (np.asarray(req.y0, dtype=float) <= req.t0).astype(float)
        interval = oracle.bipartite_sharp_dpo(a1, a0)
        params = {"op": "bipartite", "t1": req.t1, "t0": req.t0}
    payload = {
        "min": interval.min,
        "max": interval.max,
        "argmin_perm": list(interval.argmin_perm),
        "argmax_perm": list(interval.argmax_perm),
    }
    return _document("sharp_interval", arrays, params, payload)


def handle_density(req: schemas.DensityRequest) -> ResultDocument:
    grid, dens = density_grid(req.values, req.weights, req.bandwidth)
    params = {"bandwidth": req.bandwidth, "points": len(grid)}
    payload = {"y": grid, "density": dens}
    arrays = [np.asarray(req.values, dtype=float)[None, :]]
    return _document("density_grid", arrays, params, payload)
