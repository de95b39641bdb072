"""Command-line front end.

Every command builds the same request model the HTTP service accepts and
produces the same result document, either by invoking the handler
in-process (default) or by POSTing the request to a running service
(``--server``).  Results go to ``--out`` as deterministic JSON or to
stdout; diagnostics go to stderr.

Exit codes: 0 success, 1 domain or file error, 2 usage error.
"""

import argparse
import os
import sys

import numpy as np
from pydantic import ValidationError

from .io_formats import (
    ResultDocument,
    read_matrix_csv,
    render_json,
    write_density_samples,
    write_matrix_csv,
    write_result_json,
)
from .service import handlers, schemas

USAGE_ERROR = 2
DOMAIN_ERROR = 1


def _usage_error(message):
    print(f"spectralte: {message}", file=sys.stderr)
    raise SystemExit(USAGE_ERROR)


_HANDLERS = {
    "dpo": handlers.handle_dpo,
    "dte": handlers.handle_dte,
    "cells": handlers.handle_cells,
    "ste": handlers.handle_ste,
    "hetero": handlers.handle_hetero,
    "bipartite": handlers.handle_bipartite,
    "randtest": handlers.handle_randtest,
    "smooth": handlers.handle_smooth,
    "synth": handlers.handle_synth,
    "oracle": handlers.handle_oracle,
    "density": handlers.handle_density,
}


def _read_matrix(path, args, as_bipartite=False):
    m = read_matrix_csv(
        path,
        header=args.header,
        delimiter=args.delimiter,
        as_bipartite=as_bipartite,
    )
    return m.entries.tolist()


def _read_column(path, convert=float):
    values = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            cell = text.split(",")[0].strip()
            try:
                values.append(convert(cell))
            except ValueError:
                raise ValueError(
                    f"{path}: cannot parse {cell!r} on line {line_no}"
                ) from None
    if not values:
        raise ValueError(f"{path}: no values")
    return values


def _read_pairs_file(path, args):
    """Each line names a treated,control CSV pair (relative to the list file)."""
    base = os.path.dirname(os.path.abspath(path))
    pairs = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = [p.strip() for p in text.split(",")]
            if len(parts) != 2:
                raise ValueError(
                    f"{path}: line {line_no} must name two files, got {text!r}"
                )
            paths = [p if os.path.isabs(p) else os.path.join(base, p) for p in parts]
            pairs.append(
                {
                    "y1": _read_matrix(paths[0], args),
                    "y0": _read_matrix(paths[1], args),
                }
            )
    if not pairs:
        raise ValueError(f"{path}: no pairs listed")
    return pairs


def _parse_grid(text):
    """Either 'a,b,c' (explicit points) or 'start:stop:count'."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid range must be start:stop:count, got {text!r}")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise ValueError(f"grid count must be >= 1, got {count}")
        return np.linspace(start, stop, count).tolist()
    return [float(p) for p in text.split(",") if p.strip() != ""]


def _execute(command, request, args):
    """Run in-process or against a remote service; returns the document mapping."""
    if args.server:
        import httpx

        response = httpx.post(
            args.server.rstrip("/") + f"/{command}",
            json=request.model_dump(),
            timeout=args.timeout,
        )
        if response.status_code == 400:
            raise ValueError(response.json().get("detail", response.text))
        if response.status_code == 422:
            raise SystemExit(USAGE_ERROR)
        response.raise_for_status()
        return response.json()
    return _HANDLERS[command](request).to_mapping()


def _emit(mapping, args):
    if args.out:
        doc = ResultDocument(
            kind=mapping["kind"],
            inputs_digest=mapping["inputs_digest"],
            parameters=mapping["parameters"],
            payload=mapping["payload"],
            library_version=mapping["library_version"],
        )
        write_result_json(doc, args.out)
    else:
        print(render_json(mapping))
    return 0


# ---------------------------------------------------------------------------
# per-command runners


def _run_dpo(args):
    req = schemas.DpoRequest(
        y1=_read_matrix(args.y1, args),
        y0=_read_matrix(args.y0, args),
        t1=args.t1,
        t0=args.t0,
        exclude_diagonal=args.exclude_diagonal,
    )
    return _emit(_execute("dpo", req, args), args)


def _run_dte(args):
    if (args.y is None) == (args.grid is None):
        _usage_error("provide exactly one of --y or --grid")
    req = schemas.DteRequest(
        y1=_read_matrix(args.y1, args),
        y0=_read_matrix(args.y0, args),
        y=args.y,
        grid=_parse_grid(args.grid) if args.grid else None,
        monotonize=args.monotonize,
        exclude_diagonal=args.exclude_diagonal,
    )
    return _emit(_execute("dte", req, args), args)


def _run_cells(args):
    if args.pairs:
        pairs = _read_pairs_file(args.pairs, args)
        weights = _read_column(args.weights) if args.weights else None
    else:
        if not (args.y1 and args.y0):
            _usage_error("provide --y1/--y0 or --pairs")
        pairs = [{"y1": _read_matrix(args.y1, args), "y0": _read_matrix(args.y0, args)}]
        weights = None
    req = schemas.CellsRequest(
        pairs=pairs,
        weights=weights,
        exclude_diagonal=args.exclude_diagonal,
        hetero_mode=args.hetero_mode,
    )
    return _emit(_execute("cells", req, args), args)


def _run_ste(args):
    req = schemas.SteRequest(
        y1=_read_matrix(args.y1, args),
        y0=_read_matrix(args.y0, args),
        basis=args.basis,
    )
    mapping = _execute("ste", req, args)
    if args.density:
        entries = np.asarray(mapping["payload"]["entries"], dtype=float).ravel()
        write_density_samples(entries, np.ones_like(entries), args.density)
    return _emit(mapping, args)


def _run_hetero(args):
    req = schemas.HeteroRequest(
        op=args.op,
        y1=_read_matrix(args.y1, args),
        y0=_read_matrix(args.y0, args),
        mode=args.mode,
        t1=args.t1,
        t0=args.t0,
        y=args.y,
        basis=args.basis,
        exclude_diagonal=args.exclude_diagonal,
    )
    return _emit(_execute("hetero", req, args), args)


def _run_bipartite(args):
    req = schemas.BipartiteRequest(
        op=args.op,
        b1=_read_matrix(args.b1, args, as_bipartite=True),
        b0=_read_matrix(args.b0, args, as_bipartite=True),
        t1=args.t1,
        t0=args.t0,
        hetero_mode=args.hetero_mode,
    )
    return _emit(_execute("bipartite", req, args), args)


def _run_randtest(args):
    fields = {"design": args.design, "resamples": args.A, "seed": args.seed}
    if args.design == "matched":
        if not args.pairs:
            _usage_error("design 'matched' needs --pairs")
        fields["pairs"] = _read_pairs_file(args.pairs, args)
    elif args.design == "conjunctive":
        for flag in ("y", "buyer_groups", "seller_groups", "pi"):
            if getattr(args, flag) is None:
                _usage_error(f"design 'conjunctive' needs --{flag.replace('_', '-')}")
        fields["y"] = _read_matrix(args.y, args, as_bipartite=True)
        fields["buyer_groups"] = _read_column(args.buyer_groups, int)
        fields["seller_groups"] = _read_column(args.seller_groups, int)
        fields["pi"] = args.pi
    else:
        for flag in ("y1", "y0", "pi"):
            if getattr(args, flag) is None:
                _usage_error(f"design 'censored' needs --{flag}")
        fields["y1"] = _read_matrix(args.y1, args)
        fields["y0"] = _read_matrix(args.y0, args)
        fields["pi"] = args.pi
    req = schemas.RandTestRequest(**fields)
    return _emit(_execute("randtest", req, args), args)


def _run_smooth(args):
    req = schemas.SmoothRequest(
        op=args.op,
        y1=_read_matrix(args.y1, args),
        y0=_read_matrix(args.y0, args),
        bandwidth=args.bandwidth,
        kernel=args.kernel,
        t1=args.t1,
        t0=args.t0,
        y=args.y,
        basis=args.basis,
    )
    return _emit(_execute("smooth", req, args), args)


def _run_synth(args):
    req = schemas.SynthRequest(
        generator=args.generator,
        seed=args.seed,
        n=args.n,
        edge_prob=args.edge_prob,
        adjacency=_read_matrix(args.adjacency, args) if args.adjacency else None,
        characteristics=(
            _read_matrix(args.characteristics, args, as_bipartite=True)
            if args.characteristics
            else None
        ),
        alpha0=args.alpha0,
        alpha1=args.alpha1,
        periods=args.periods,
        beta0=args.beta0,
        beta1=args.beta1,
        noise_scale=args.noise_scale,
        rho0=args.rho0,
        rho1=args.rho1,
        n_factors=args.n_factors,
        include_aligned=not args.observed_only,
    )
    mapping = _execute("synth", req, args)
    if args.out_prefix:
        payload = mapping["payload"]
        for key in ("y1_obs", "y0_obs", "y1_star", "y0_star"):
            if key in payload:
                write_matrix_csv(
                    np.asarray(payload[key], dtype=float),
                    f"{args.out_prefix}_{key}.csv",
                )
        print(
            f"wrote {args.out_prefix}_*.csv (seed {mapping['parameters']['seed']})",
            file=sys.stderr,
        )
    return _emit(mapping, args)


def _run_oracle(args):
    req = schemas.OracleRequest(
        op=args.op,
        y1=_read_matrix(args.y1, args, as_bipartite=args.op == "bipartite"),
        y0=_read_matrix(args.y0, args, as_bipartite=args.op == "bipartite"),
        t1=args.t1,
        t0=args.t0,
        y=args.y,
    )
    return _emit(_execute("oracle", req, args), args)


def _run_density(args):
    req = schemas.DensityRequest(
        values=_read_column(args.values),
        weights=_read_column(args.weights) if args.weights else None,
        bandwidth=args.bandwidth,
    )
    return _emit(_execute("density", req, args), args)


def _run_serve(args):
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_common(sub):
    sub.add_argument("--out", help="write the result document to this JSON file")
    sub.add_argument("--server", help="POST the request to a running service instead")
    sub.add_argument("--timeout", type=float, default=600.0, help="HTTP timeout (s)")
    sub.add_argument("--header", action="store_true", help="CSV inputs have a header row")
    sub.add_argument("--delimiter", default=",", help="CSV delimiter (default ,)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spectralte",
        description=(
            "Eigenvalue bounds and spectral treatment effects for double "
            "randomized experiments with outcome matrices"
        ),
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("dpo", help="joint-distribution bounds at one threshold pair")
    p.add_argument("--y1", required=True)
    p.add_argument("--y0", required=True)
    p.add_argument("--t1", type=float, required=True)
    p.add_argument("--t0", type=float, required=True)
    p.add_argument("--exclude-diagonal", action="store_true")
    _add_common(p)
    p.set_defaults(func=_run_dpo)

    p = subs.add_parser("dte", help="treatment-effect distribution bounds")
    p.add_argument("--y1", required=True)
    p.add_argument("--y0", required=True)
    p.add_argument("--y", type=float, help="single effect threshold")
    p.add_argument("--grid", help="'a,b,c' or start:stop:count")
    p.add_argument("--monotonize", action="store_true")
    p.add_argument("--exclude-diagonal", action="store_true")
    _add_common(p)
    p.set_defaults(func=_run_dte)

    p = subs.add_parser("cells", help="binary joint-cell bounds, optionally multi-network")
    p.add_argument("--y1")
    p.add_argument("--y0")
    p.add_argument("--pairs", help="file listing treated,control CSV pairs per line")
    p.add_argument("--weights", help="file with one weight per line")
    p.add_argument("--hetero-mode", choices=["conservative", "paperExact"])
    p.add_argument("--exclude-diagonal", action="store_true")
    _add_common(p)
    p.set_defaults(func=_run_cells)

    p = subs.add_parser("ste", help="spectral treatment effects matrix")
    p.add_argument("--y1", required=True)
    p.add_argument("--y0", required=True)
    p.add_argument("--basis", choices=["treated", "untreated"], default="treated")
    p.add_argument("--density", help="also write entry density samples to this CSV")
    _add_common(p)
    p.set_defaults(func=_run_ste)

    p = subs.add_parser("hetero", help="row/column-heterogeneity adjusted results")
    p.add_argument("--op", choices=["dpo", "dte", "ste"], required=True)
    p.add_argument("--y1", required=True)
    p.add_argument("--y0", required=True)
    p.add_argument("--mode", choices=["conservative", "paperExact"], default="conservative")
    p.add_argument("--t1", type=float)
    p.add_argument("--t0", type=float)
    p.add_argument("--y", type=float)
    p.add_argument("--basis", choices=["treated", "untreated"], default="treated")
    p.add_argument("--exclude-diagonal", action="store_true")
    _add_common(p)
    p.set_defaults(func=_run_hetero)

    p = subs.add_parser("bipartite", help="two-population bounds via symmetrization")
    p.add_argument("--op", choices=["dpo", "cells"], default="dpo")
    p.add_argument("--b1", required=True)
    p.add_argument("--b0", required=True)
    p.add_argument("--t1", type=float)
    p.add_argument("--t0", type=float)
    p.add_argument("--hetero-mode", choices=["conservative", "paperExact"])
    _add_common(p)
    p.set_defaults(func=_run_bipartite)

    p = subs.add_parser("randtest", help="randomization tests")
    p.add_argument("--design", choices=["matched", "conjunctive", "censored"], required=True)
    p.add_argument("--A", type=int, default=99, help="number of resamples")
    p.add_argument("--seed", type=int)
    p.add_argument("--pairs", help="matched design: file listing matrix pairs")
    p.add_argument("--y", help="conjunctive design: transaction matrix CSV")
    p.add_argument("--buyer-groups", dest="buyer_groups")
    p.add_argument("--seller-groups", dest="seller_groups")
    p.add_argument("--y1", help="censored design: treated matrix CSV")
    p.add_argument("--y0", help="censored design: control matrix CSV")
    p.add_argument("--pi", type=float)
    _add_common(p)
    p.set_defaults(func=_run_randtest)

    p = subs.add_parser("smooth", help="kernel-smoothed estimators")
    p.add_argument("--op", choices=["product", "dpo", "cdf"], required=True)
    p.add_argument("--y1", required=True)
    p.add_argument("--y0", required=True)
    p.add_argument("--h", dest="bandwidth", type=float, help="bandwidth (default: rule of thumb)")
    p.add_argument(
        "--kernel",
        choices=["symmetricQuartic", "oneSidedQuintic"],
        help="default: symmetricQuartic for cdf, oneSidedQuintic otherwise",
    )
    p.add_argument("--t1", type=float)
    p.add_argument("--t0", type=float)
    p.add_argument("--y", type=float)
    p.add_argument("--basis", choices=["treated", "untreated"], default="treated")
    _add_common(p)
    p.set_defaults(func=_run_smooth)

    p = subs.add_parser("synth", help="synthetic rank-invariant experiments")
    p.add_argument(
        "--generator",
        choices=["diffusion", "social", "linkformation", "factor"],
        required=True,
    )
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--edge-prob", dest="edge_prob", type=float, default=0.3)
    p.add_argument("--adjacency", help="CSV adjacency matrix (else seeded random graph)")
    p.add_argument("--characteristics", help="CSV characteristics matrix")
    p.add_argument("--alpha0", type=float, default=0.2)
    p.add_argument("--alpha1", type=float, default=0.3)
    p.add_argument("--periods", type=int, default=3)
    p.add_argument("--beta0", type=float, default=0.05)
    p.add_argument("--beta1", type=float, default=0.08)
    p.add_argument("--noise-scale", dest="noise_scale", type=float, default=1.0)
    p.add_argument("--rho0", type=float, default=0.7)
    p.add_argument("--rho1", type=float, default=1.3)
    p.add_argument("--n-factors", dest="n_factors", type=int, default=5)
    p.add_argument("--observed-only", action="store_true", help="omit aligned pair")
    p.add_argument("--out-prefix", help="also write matrices as PREFIX_*.csv")
    _add_common(p)
    p.set_defaults(func=_run_synth)

    p = subs.add_parser("oracle", help="brute-force sharp intervals (small n)")
    p.add_argument("--op", choices=["dpo", "dte", "bipartite"], required=True)
    p.add_argument("--y1", required=True)
    p.add_argument("--y0", required=True)
    p.add_argument("--t1", type=float)
    p.add_argument("--t0", type=float)
    p.add_argument("--y", type=float)
    _add_common(p)
    p.set_defaults(func=_run_oracle)

    p = subs.add_parser("density", help="Gaussian-kernel density grid from samples")
    p.add_argument("--values", required=True, help="CSV with one value per line")
    p.add_argument("--weights", help="CSV with one weight per line")
    p.add_argument("--bandwidth", type=float)
    _add_common(p)
    p.set_defaults(func=_run_density)

    p = subs.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_run_serve)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"spectralte: invalid request: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except FileNotFoundError as exc:
        print(f"spectralte: {exc}", file=sys.stderr)
        return DOMAIN_ERROR
    except (ValueError, OSError) as exc:
        print(f"spectralte: {exc}", file=sys.stderr)
        return DOMAIN_ERROR
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else DOMAIN_ERROR
    except Exception as exc:  # httpx errors, unexpected service failures
        print(f"spectralte: {type(exc).__name__}: {exc}", file=sys.stderr)
        return DOMAIN_ERROR


if __name__ == "__main__":
    sys.exit(main())
