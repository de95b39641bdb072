"""File formats shared by the CLI and service: CSV matrix ingestion, a
deterministic JSON result document, and density-sample emission.

JSON documents are byte-deterministic: keys keep insertion order, floats
are rendered with 17 significant digits (exact float64 round trip), and
NaN/Inf are rejected rather than emitted.
"""

import csv
import hashlib
import json
import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .bipartite import BipartiteMatrix
from .spectra import OutcomeMatrix, SYMMETRY_RTOL


# ---------------------------------------------------------------------------
# deterministic JSON


def _render_json(obj, out):
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError(f"JSON payload cannot contain non-finite number {x}")
        out.append(f"{x:.17g}")
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (key, value) in enumerate(obj.items()):
            if i:
                out.append(",")
            if not isinstance(key, str):
                raise ValueError(f"JSON object keys must be strings, got {key!r}")
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(":")
            _render_json(value, out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        out.append("[")
        for i, value in enumerate(seq):
            if i:
                out.append(",")
            _render_json(value, out)
        out.append("]")
    else:
        raise ValueError(f"cannot serialize {type(obj).__name__} to JSON")


def render_json(obj):
    """Deterministic JSON text: insertion-order keys, 17-digit floats."""
    out = []
    _render_json(obj, out)
    return "".join(out)


def atomic_write_text(path, text):
    """Write via a temporary file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def inputs_digest(arrays=(), params=None):
    """Platform-stable hex digest of input matrices and parameters."""
    doc = {
        "arrays": [np.asarray(a, dtype=float) for a in arrays],
        "params": params or {},
    }
    return hashlib.sha256(render_json(doc).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ResultDocument:
    """Self-describing result envelope written by every command."""

    kind: str
    inputs_digest: str
    parameters: dict
    payload: dict
    library_version: str = field(default=__version__)

    def to_mapping(self):
        return {
            "kind": self.kind,
            "inputs_digest": self.inputs_digest,
            "parameters": self.parameters,
            "payload": self.payload,
            "library_version": self.library_version,
        }


def write_result_json(doc, path):
    try:
        text = render_json(doc.to_mapping()) + "\n"
    except ValueError as exc:
        raise ValueError(f"result document for {path}: {exc}") from exc
    try:
        atomic_write_text(path, text)
    except OSError as exc:
        raise OSError(f"cannot write result to {path}: {exc}") from exc


def read_result_json(path):
    with open(path, encoding="utf-8") as handle:
        raw = json.load(handle)
    return ResultDocument(
        kind=raw["kind"],
        inputs_digest=raw["inputs_digest"],
        parameters=raw["parameters"],
        payload=raw["payload"],
        library_version=raw["library_version"],
    )


# ---------------------------------------------------------------------------
# CSV matrices


def read_matrix_csv(path, header=False, delimiter=",", symmetrize_tol=SYMMETRY_RTOL,
                    as_bipartite=False, arm=1):
    """Parse a rectangular numeric CSV into an outcome or bipartite matrix.

    Square grids become OutcomeMatrix (symmetrized within tolerance) unless
    ``as_bipartite`` forces the two-population reading; rectangular grids
    always become BipartiteMatrix.
    """
    rows = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle, delimiter=delimiter)
        for row_index, row in enumerate(reader, start=1):
            if header and row_index == 1:
                continue
            if not row or (len(row) == 1 and row[0].strip() == ""):
                continue  # ignore blank lines
            parsed = []
            for col_index, cell in enumerate(row, start=1):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise ValueError(
                        f"{path}: non-numeric cell {cell!r} at row {row_index}, "
                        f"column {col_index}"
                    ) from None
            rows.append((row_index, parsed))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    width = len(rows[0][1])
    for row_index, parsed in rows:
        if len(parsed) != width:
            raise ValueError(
                f"{path}: ragged row {row_index} has {len(parsed)} cells, "
                f"expected {width}"
            )
    grid = np.asarray([parsed for _, parsed in rows], dtype=float)
    if not np.all(np.isfinite(grid)):
        raise ValueError(f"{path}: matrix contains non-finite values")
    if as_bipartite or grid.shape[0] != grid.shape[1]:
        return BipartiteMatrix(grid, arm=arm)
    try:
        return OutcomeMatrix(grid, arm=arm)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc


def write_matrix_csv(entries, path, delimiter=","):
    a = np.asarray(entries, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"matrix must be 2-d, got shape {a.shape}")
    lines = [delimiter.join(f"{x:.17g}" for x in row) for row in a]
    atomic_write_text(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# density samples


def normalized_weights(values, weights=None):
    v = np.asarray(values, dtype=float).ravel()
    if weights is None:
        w = np.ones_like(v)
    else:
        w = np.asarray(weights, dtype=float).ravel()
    if len(v) != len(w):
        raise ValueError(f"{len(v)} values but {len(w)} weights")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    total = w.sum()
    if total <= 0:
        raise ValueError("weights must sum to a positive value")
    return v, w / total


def write_density_samples(values, weights, path):
    """Two-column CSV (value, weight) with weights normalized to sum 1."""
    v, w = normalized_weights(values, weights)
    lines = ["value,weight"]
    lines += [f"{x:.17g},{y:.17g}" for x, y in zip(v, w)]
    atomic_write_text(path, "\n".join(lines) + "\n")


def density_grid(values, weights=None, bandwidth=None, points=401):
    """Gaussian-kernel weighted density on a regular grid.

    The grid spans [min - 3h, max + 3h] with `points` points, so the
    density decays to ~zero at both ends for external plotting.
    """
    v, w = normalized_weights(values, weights)
    if bandwidth is None:
        sd = float(np.sqrt(np.sum(w * (v - np.sum(w * v)) ** 2)))
        bandwidth = 1.06 * (sd if sd > 0 else max(1.0, np.abs(v).max())) * len(v) ** (
            -1.0 / 5.0
        )
    if bandwidth <= 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    grid = np.linspace(v.min() - 3 * bandwidth, v.max() + 3 * bandwidth, points)
    z = (grid[:, None] - v[None, :]) / bandwidth
    dens = np.sum(w[None, :] * np.exp(-0.5 * z**2), axis=1) / (
        bandwidth * np.sqrt(2 * np.pi)
    )
    return grid, dens


def write_density_grid(values, weights, path, bandwidth=None):
    grid, dens = density_grid(values, weights, bandwidth)
    lines = ["y,density"]
    lines += [f"{x:.17g},{d:.17g}" for x, d in zip(grid, dens)]
    atomic_write_text(path, "\n".join(lines) + "\n")
