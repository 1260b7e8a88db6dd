"""
Built-in reproduction targets for the two published test problems.

Each target is a list of named runs. ``reproduce`` executes them in order,
writes one trace CSV per run, a comparison CSV, a text report and an SVG
plot of the error curves.
"""

import functools
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import io, problems
from .diagnostics import distance_to_solution_set
from .errors import PairProxError, ScheduleWarning
from .operators import AffineOperator, KernelSpec
from .plotting import plot_error_curves
from .solvers import Schedule, SolverConfig, gippa_run, newton_run, validate_schedules

REPRO_MAX_ITER = 200
REPRO_TOL = 1e-12
COMPARE_THRESHOLD = 1e-6

DEFAULT_GAMMA = Schedule.offset_inverse(0.1, 0.3, 10)
DEFAULT_ALPHA = Schedule.capped_ramp(0.3, 10)

ALPHA_SWEEP = [
    ("alpha0", Schedule.constant(0.0)),
    ("alpha0.1", Schedule.constant(0.1)),
    ("alpha0.2", Schedule.constant(0.2)),
    ("alpha0.3", Schedule.constant(0.3)),
    ("alpha0.5", Schedule.constant(0.5)),
    ("alpha-ramp", DEFAULT_ALPHA),
]


@dataclass(frozen=True)
class Run:
    config_id: str
    operator: object
    kernel: KernelSpec
    solver: SolverConfig
    reference: Optional[np.ndarray]
    label: str


@dataclass
class RunResult:
    run: Run
    trace: object = None
    error: Optional[str] = None

    @property
    def iterations_to_threshold(self):
        if self.trace is None or self.run.reference is None:
            return None
        return self.trace.iterations_to(COMPARE_THRESHOLD)

    @property
    def final_error(self):
        if self.trace is None or not self.trace.records or self.run.reference is None:
            return None
        return self.trace.records[-1].err_to_ref


@functools.lru_cache(maxsize=None)
def _example2_root():
    tr = newton_run(problems.example2(), problems.EXAMPLE2_APPROX_SOLUTION, tol=1e-14, max_iter=50)
    return tr.final.copy()


def example2_reference():
    """Root of the second test problem refined by Newton from the published approximation."""
    return _example2_root().copy()


def _solver(gamma, alpha, x0, x1, max_iter=REPRO_MAX_ITER, tol=REPRO_TOL):
    return SolverConfig(gamma, alpha, x0, x1, tol_step=tol, tol_residual=tol, max_iter=max_iter)


def _example1_run(config_id, kernel_name, gamma, alpha, label, **kw):
    return Run(
        config_id,
        problems.example1(),
        problems.example1_kernel(kernel_name),
        _solver(gamma, alpha, problems.EXAMPLE1_X0, problems.EXAMPLE1_X1, **kw),
        problems.EXAMPLE1_SOLUTION,
        label,
    )


def _example2_run(config_id, gamma, alpha, label, **kw):
    return Run(
        config_id,
        problems.example2(),
        problems.example2_kernel(),
        _solver(gamma, alpha, problems.EXAMPLE2_X0, problems.EXAMPLE2_X1, **kw),
        example2_reference(),
        label,
    )


def _figure1a():
    return [_example1_run(f"figure1a-{tag}", "v1", DEFAULT_GAMMA, a, f"alpha={a.label()}")
            for tag, a in ALPHA_SWEEP]


def _figure1b():
    gammas = [("gamma0.05", Schedule.constant(0.05)), ("gamma0.1", Schedule.constant(0.1)),
              ("gamma-offset", DEFAULT_GAMMA), ("gamma0.5", Schedule.constant(0.5)),
              ("gamma1", Schedule.constant(1.0))]
    return [_example1_run(f"figure1b-{tag}", "v1", g, DEFAULT_ALPHA, f"gamma={g.label()}")
            for tag, g in gammas]


def _figure3a():
    return [_example2_run(f"figure3a-{tag}", Schedule.constant(0.5), a, f"alpha={a.label()}")
            for tag, a in ALPHA_SWEEP]


def _figure3b():
    gammas = [("gamma0.1", 0.1), ("gamma0.25", 0.25), ("gamma0.5", 0.5), ("gamma1", 1.0), ("gamma2", 2.0)]
    return [_example2_run(f"figure3b-{tag}", Schedule.constant(g), DEFAULT_ALPHA, f"gamma={g:g}")
            for tag, g in gammas]


TARGETS = {
    "example1-v1": lambda: [_example1_run("example1-v1", "v1", DEFAULT_GAMMA, DEFAULT_ALPHA, "v = v1")],
    "example1-v2": lambda: [_example1_run("example1-v2", "v2", DEFAULT_GAMMA, DEFAULT_ALPHA, "v = v2")],
    "example2": lambda: [_example2_run("example2", Schedule.constant(0.5), DEFAULT_ALPHA, "v = A")],
    "figure1a": _figure1a,
    "figure1b": _figure1b,
    "figure3a": _figure3a,
    "figure3b": _figure3b,
}


def build_target(name):
    try:
        return TARGETS[name]()
    except KeyError:
        raise KeyError(f"unknown target {name!r}; known: {sorted(TARGETS)}") from None


def execute(run):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ScheduleWarning)
        try:
            trace = gippa_run(run.operator, run.kernel, run.solver, reference=run.reference)
        except PairProxError as exc:
            return RunResult(run, getattr(exc, "trace", None), f"{type(exc).__name__}: {exc}")
    return RunResult(run, trace)


def _report_lines(target, results):
    lines = [f"target: {target}", f"runs: {len(results)}"]
    for res in results:
        run, tr = res.run, res.trace
        p = f"{run.config_id}."
        val = validate_schedules(run.solver)
        lines.append(f"{p}label: {run.label}")
        lines.append(f"{p}termination: {'error' if res.error else tr.termination}")
        if res.error:
            lines.append(f"{p}error: {res.error}")
        if tr is not None and tr.records:
            last = tr.records[-1]
            lines.append(f"{p}iterations: {len(tr)}")
            lines.append(f"{p}final_x: " + " ".join(io.fmt(v) for v in last.x_new))
            lines.append(f"{p}final_residual: {io.fmt(last.residual)}")
            lines.append(f"{p}final_v_gap: {io.fmt(last.v_gap)}")
            if last.err_to_ref is not None:
                lines.append(f"{p}final_error: {io.fmt(last.err_to_ref)}")
            if isinstance(run.operator, AffineOperator):
                d = distance_to_solution_set(run.operator.A, run.operator.b, last.x_new)
                lines.append(f"{p}final_dist_to_solution_set: {io.fmt(d)}")
        lines.append(f"{p}theory_satisfied: {val.theory_satisfied}")
    return lines


def reproduce(target, out_dir, plot=True):
    """Run every configuration of ``target`` and write its artifacts to ``out_dir``."""
    runs = build_target(target)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = [execute(run) for run in runs]
    # single collector writes everything after all runs, ordered by config id
    with (out_dir / f"{target}-comparison.csv").open("w", newline="") as fh:
        fh.write("config_id,iterations_to_1e-6,final_error\n")
        for res in results:
            if res.trace is not None:
                io.write_trace_csv(out_dir / f"{res.run.config_id}.csv", res.trace)
            it = res.iterations_to_threshold
            fe = res.final_error
            fh.write(f"{res.run.config_id},{'' if it is None else it},{'' if fe is None else io.fmt(fe)}\n")
    io.write_report(out_dir / f"{target}-report.txt", _report_lines(target, results))
    if plot:
        curves = {res.run.label: (res.trace.column("n"), res.trace.err_to_ref)
                  for res in results if res.trace is not None and res.trace.records}
        plot_error_curves(curves, out_dir / f"{target}.svg", title=target)
    return results
