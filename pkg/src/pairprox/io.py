"""Plain-text file formats: matrix CSV, trace CSV, kernel sidecar, reports."""

import csv
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .operators import KernelSpec

TRACE_HEADER = ["n", "step_gap", "v_gap", "residual", "err_to_ref"]


def fmt(x):
    """Float with 17 significant digits, enough to round-trip a double."""
    return format(float(x), ".17g")


def read_matrix_csv(path):
    """Read a headerless CSV of decimal floats into a 2-D array."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        data = [[float(c) for c in r] for r in rows]
    except ValueError as exc:
        raise ConfigError(f"{path}: non-numeric entry ({exc})") from exc
    if not data or len({len(r) for r in data}) != 1:
        raise ConfigError(f"{path}: empty or ragged matrix")
    A = np.array(data, dtype=float)
    if not np.all(np.isfinite(A)):
        raise ConfigError(f"{path}: non-finite entries")
    return A


def read_vector_csv(path):
    """A vector stored either as one row or as one column."""
    A = read_matrix_csv(path)
    if A.shape[0] == 1 or A.shape[1] == 1:
        return A.ravel()
    raise ConfigError(f"{path}: expected a single row or column, got shape {A.shape}")


def write_matrix_csv(path, A):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    with Path(path).open("w", newline="") as fh:
        for row in A:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def kernel_meta_path(path):
    path = Path(path)
    return path.with_name(path.name + ".meta")


def write_kernel_csv(path, kernel):
    """Write ``B`` as matrix CSV plus a one-line ``<path>.meta`` sidecar."""
    write_matrix_csv(path, kernel.B)
    tau = "" if kernel.tau is None else fmt(kernel.tau)
    kernel_meta_path(path).write_text(f"provenance={kernel.provenance},tau={tau}\n")


def read_kernel_csv(path):
    B = read_matrix_csv(path)
    meta = kernel_meta_path(path)
    provenance, tau = "user", None
    if meta.exists():
        fields = dict(
            item.split("=", 1) for item in meta.read_text().strip().split(",") if "=" in item
        )
        provenance = fields.get("provenance", "user")
        tau = float(fields["tau"]) if fields.get("tau") else None
    return KernelSpec(B, provenance, tau)


def write_trace_csv(path, trace):
    with Path(path).open("w", newline="") as fh:
        fh.write(",".join(TRACE_HEADER) + "\n")
        for r in trace.records:
            err = "" if r.err_to_ref is None else fmt(r.err_to_ref)
            fh.write(f"{r.n},{fmt(r.step_gap)},{fmt(r.v_gap)},{fmt(r.residual)},{err}\n")


def read_trace_csv(path):
    """Parse a trace CSV into a dict of columns; missing errors become NaN."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != TRACE_HEADER:
            raise ConfigError(f"{path}: header {header} is not {TRACE_HEADER}")
        rows = [r for r in reader if r]
    cols = {name: [] for name in TRACE_HEADER}
    for r in rows:
        cols["n"].append(int(r[0]))
        for name, val in zip(TRACE_HEADER[1:], r[1:]):
            cols[name].append(float(val) if val != "" else np.nan)
    return {k: np.array(v, dtype=int if k == "n" else float) for k, v in cols.items()}


def write_report(path, items):
    """Write ``key: value`` lines. ``items`` is a mapping or an iterable of lines."""
    if isinstance(items, dict):
        lines = [f"{k}: {v}" for k, v in items.items()]
    else:
        lines = list(items)
    Path(path).write_text("\n".join(lines) + "\n")


def write_pairs_csv(path, header, rows):
    """CSV for (n, value) lists such as violations or contraction ratios."""
    with Path(path).open("w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for n, val in rows:
            fh.write(f"{n},{fmt(val)}\n")
