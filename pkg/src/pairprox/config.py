"""
TOML run configuration for ``pairprox solve``.

Matrix and vector files are resolved relative to the config file. See
README.md for the full schema.
"""

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

from . import io, pairs, problems
from .errors import ConfigError, DimensionMismatch, ScheduleInvalid
from .operators import AffineOperator, KernelSpec, identity_kernel, jacobian
from .resolvent import InnerSolverConfig
from .solvers import Schedule, SolverConfig


@dataclass
class RunConfig:
    operator: object
    kernel: KernelSpec
    solver: SolverConfig
    reference: Optional[np.ndarray] = None
    seed: int = 0
    out_dir: Optional[Path] = None
    write_csv: bool = True
    write_report: bool = True
    write_plot: bool = False
    source: Optional[Path] = None
    raw: dict = field(default_factory=dict, repr=False)


def _vec(value, what):
    try:
        v = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{what} must be a list of numbers") from None
    if v.ndim != 1 or not np.all(np.isfinite(v)):
        raise ConfigError(f"{what} must be a flat list of finite numbers")
    return v


def _require(table, key, where):
    if key not in table:
        raise ConfigError(f"missing key {key!r} in [{where}]")
    return table[key]


def _load_problem(table, base):
    kind = _require(table, "type", "problem")
    if kind == "affine":
        A = io.read_matrix_csv(base / _require(table, "A", "problem"))
        b = io.read_vector_csv(base / _require(table, "b", "problem"))
        try:
            F = AffineOperator(A, b)
        except DimensionMismatch as exc:
            raise ConfigError(str(exc)) from None
        ref = None
    elif kind == "builtin":
        name = _require(table, "name", "problem")
        try:
            F = problems.get_builtin(name)
        except KeyError as exc:
            raise ConfigError(str(exc)) from None
        ref = problems.EXAMPLE1_SOLUTION if name == "example1" else None
    else:
        raise ConfigError(f"unknown problem type {kind!r}")
    if "reference" in table:
        ref = _vec(table["reference"], "problem.reference")
    return F, ref


def _load_kernel(table, base, F, anchor):
    kind = table.get("type", "identity")
    n = F.dimension
    if kind == "identity":
        return identity_kernel(n)
    if kind == "matrix":
        return io.read_kernel_csv(base / _require(table, "file", "kernel"))
    if kind != "construct":
        raise ConfigError(f"unknown kernel type {kind!r}")
    method = _require(table, "method", "kernel")
    A = F.A if isinstance(F, AffineOperator) else jacobian(F, anchor)
    replacement = float(table.get("replacement", 1.0))
    if method == "factored":
        return pairs.construct_kernel_factored(A, replacement)
    if method == "symmetric":
        return pairs.construct_kernel_symmetric(A, replacement)
    if method == "perturbation":
        A1 = io.read_matrix_csv(base / _require(table, "a1", "kernel"))
        return pairs.construct_kernel_perturbation(A, A1, check=bool(table.get("check", True)))
    raise ConfigError(f"unknown kernel construction {method!r}")


def _schedule(value, what):
    if isinstance(value, (int, float)):
        return Schedule.constant(value)
    if not isinstance(value, dict):
        raise ConfigError(f"{what} must be a number or a table")
    try:
        return Schedule.from_dict(value)
    except ScheduleInvalid as exc:
        raise ConfigError(f"{what}: {exc}") from None


def load_config(path):
    """Parse a TOML run configuration into solver-ready objects.

    Raises
    ------
    ConfigError
        Missing files, unknown keys' values or inconsistent dimensions.
    HypothesisViolated
        A perturbation kernel was requested with a failing hypothesis.
    """
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    base = path.parent
    F, ref = _load_problem(_require(raw, "problem", "root"), base)
    init = _require(raw, "init", "root")
    x0 = _vec(_require(init, "x0", "init"), "init.x0")
    x1 = _vec(_require(init, "x1", "init"), "init.x1")
    if x0.shape[0] != F.dimension or x1.shape[0] != F.dimension:
        raise ConfigError(f"initial points must have length {F.dimension}")
    kernel = _load_kernel(raw.get("kernel", {}), base, F, ref if ref is not None else x1)
    if kernel.dimension != F.dimension:
        raise ConfigError(f"kernel is {kernel.dimension}x{kernel.dimension}, problem has n = {F.dimension}")
    sched = raw.get("schedules", {})
    tols = raw.get("tolerances", {})
    try:
        solver = SolverConfig(
            gamma=_schedule(sched.get("gamma", 1.0), "schedules.gamma"),
            alpha=_schedule(sched.get("alpha", 0.0), "schedules.alpha"),
            x0=x0,
            x1=x1,
            tol_step=float(tols.get("step", 1e-10)),
            tol_residual=float(tols.get("residual", 1e-10)),
            max_iter=int(raw.get("max_iter", 10_000)),
            inner=InnerSolverConfig(tol=float(tols.get("inner", 1e-12))),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out = raw.get("output", {})
    return RunConfig(
        operator=F,
        kernel=kernel,
        solver=solver,
        reference=ref,
        seed=int(raw.get("seed", 0)),
        out_dir=(base / out["dir"]) if "dir" in out else None,
        write_csv=bool(out.get("csv", True)),
        write_report=bool(out.get("report", True)),
        write_plot=bool(out.get("plot", False)),
        source=path,
        raw=raw,
    )
