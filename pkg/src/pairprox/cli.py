"""Command-line entry point: ``pairprox <solve|kernel|certify|reproduce|rate>``."""

import argparse
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import io, pairs, problems
from .config import load_config
from .diagnostics import estimate_linear_rate
from .errors import ConfigError, HypothesisViolated, NonPositive, PairProxError, ScheduleWarning
from .experiments import TARGETS, reproduce
from .operators import AffineOperator, KernelSpec
from .plotting import plot_error_curves
from .solvers import gippa_run, validate_schedules

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_MAX_ITER = 2
EXIT_SOLVER = 3
EXIT_HYPOTHESIS = 4
EXIT_NOT_MONOTONE = 5
EXIT_INCONCLUSIVE = 6

logger = logging.getLogger("pairprox")


def _err(msg):
    print(f"error: {msg}", file=sys.stderr)


def _rate_lines(series, name):
    try:
        rho, r2 = estimate_linear_rate(series)
    except (ValueError, NonPositive) as exc:
        return [f"rate_series: {name}", f"rate: unavailable ({exc})"]
    return [f"rate_series: {name}", f"rho_hat: {io.fmt(rho)}", f"r_squared: {io.fmt(r2)}"]


def cmd_solve(args):
    try:
        cfg = load_config(args.config)
    except HypothesisViolated as exc:
        _err(f"{exc}; witness = {exc.witness}")
        return EXIT_HYPOTHESIS
    except (ConfigError, OSError, ValueError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    out = Path(args.out) if args.out else cfg.out_dir or Path(".")
    out.mkdir(parents=True, exist_ok=True)
    validation = validate_schedules(cfg.solver)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ScheduleWarning)
        try:
            trace = gippa_run(cfg.operator, cfg.kernel, cfg.solver, reference=cfg.reference)
            failure = None
        except PairProxError as exc:
            trace = getattr(exc, "trace", None)
            failure = exc
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)

    lines = [
        f"config: {cfg.source}",
        f"kernel_provenance: {cfg.kernel.provenance}",
        f"alpha_nondecreasing: {validation.alpha_nondecreasing}",
        f"alpha_cap: {io.fmt(validation.alpha_cap)}",
        f"gamma_inf: {io.fmt(validation.gamma_inf)}",
        f"theory_satisfied: {validation.theory_satisfied}",
    ]
    if isinstance(cfg.operator, AffineOperator):
        cert = pairs.certify_linear_pair(cfg.operator.A, cfg.kernel.B)
        lines += [f"pair_status: {cert.status}", f"pair_lambda_min: {io.fmt(cert.lambda_min)}"]
    if trace is not None and cfg.write_csv:
        io.write_trace_csv(out / "trace.csv", trace)
    if failure is not None:
        lines += ["termination: error", f"error: {type(failure).__name__}: {failure}"]
        if cfg.write_report:
            io.write_report(out / "report.txt", lines)
        _err(str(failure))
        return EXIT_SOLVER

    last = trace.records[-1]
    lines += [
        f"termination: {trace.termination}",
        f"iterations: {len(trace)}",
        "final_x: " + " ".join(io.fmt(v) for v in last.x_new),
        f"final_residual: {io.fmt(last.residual)}",
        f"final_v_gap: {io.fmt(last.v_gap)}",
    ]
    if last.err_to_ref is not None:
        lines.append(f"final_err_to_ref: {io.fmt(last.err_to_ref)}")
        lines += _rate_lines(trace.err_to_ref, "err_to_ref")
    else:
        lines += _rate_lines(trace.column("residual"), "residual")
    if cfg.write_report:
        io.write_report(out / "report.txt", lines)
    if cfg.write_plot or args.plot:
        series = trace.err_to_ref if trace.reference is not None else trace.column("residual")
        ylabel = r"$\|x_n - x^*\|_2$" if trace.reference is not None else r"$\|F(x_n)\|_\infty$"
        plot_error_curves({"gippa": (trace.column("n"), series)}, out / "trace.svg", ylabel=ylabel)
    print("\n".join(lines))
    return EXIT_OK if trace.converged else EXIT_MAX_ITER


def cmd_kernel(args):
    try:
        A = io.read_matrix_csv(args.matrix)
        if args.method == "factored":
            kernel = pairs.construct_kernel_factored(A, args.replacement)
        elif args.method == "symmetric":
            kernel = pairs.construct_kernel_symmetric(A, args.replacement)
        else:
            if not args.a1:
                raise ConfigError("--a1 is required for the perturbation method")
            kernel = pairs.construct_kernel_perturbation(A, io.read_matrix_csv(args.a1), check=not args.force)
    except HypothesisViolated as exc:
        _err(str(exc))
        print("hypothesis: violated")
        print("witness: " + " ".join(io.fmt(w) for w in exc.witness))
        print(f"witness_value: {io.fmt(exc.value)}")
        return EXIT_HYPOTHESIS
    except (PairProxError, ValueError, OSError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    io.write_kernel_csv(args.out, kernel)
    cert = pairs.certify_linear_pair(A, kernel.B)
    print(f"kernel: {args.out}")
    print(f"provenance: {kernel.provenance}")
    print(cert.describe())
    return EXIT_OK


def _certify_exit(cert):
    if cert.is_monotone:
        return EXIT_OK
    if cert.status == pairs.NOT_MONOTONE:
        return EXIT_NOT_MONOTONE
    return EXIT_INCONCLUSIVE


def cmd_certify(args):
    try:
        B = io.read_matrix_csv(args.b)
        if args.builtin:
            f = problems.get_builtin(args.builtin)
            n = f.dimension
            lower = np.full(n, -args.half_width)
            upper = np.full(n, args.half_width)
            cert = pairs.certify_nonlinear_pair_sampled(
                f, KernelSpec(B), lower, upper, samples=args.samples, seed=args.seed
            )
        else:
            if not args.a:
                raise ConfigError("either --a or --builtin is required")
            cert = pairs.certify_linear_pair(io.read_matrix_csv(args.a), B)
    except (PairProxError, ValueError, KeyError, OSError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    print(cert.describe())
    return _certify_exit(cert)


def cmd_reproduce(args):
    try:
        results = reproduce(args.target, args.out, plot=not args.no_plot)
    except OSError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    for res in results:
        status = res.error or res.trace.termination
        it = res.iterations_to_threshold
        fe = res.final_error
        print(f"{res.run.config_id}: {status}; iterations_to_1e-6={'' if it is None else it}; "
              f"final_error={'' if fe is None else io.fmt(fe)}")
    return EXIT_OK


def cmd_rate(args):
    try:
        cols = io.read_trace_csv(args.trace)
    except (ConfigError, OSError, ValueError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    err = cols["err_to_ref"]
    name, series = ("err_to_ref", err) if len(err) and not np.any(np.isnan(err)) else ("residual", cols["residual"])
    try:
        rho, r2 = estimate_linear_rate(series)
    except (ValueError, NonPositive) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    print(f"series: {name}")
    print(f"rho_hat: {rho:.12g}")
    print(f"r_squared: {r2:.12g}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="pairprox", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run the inertial iteration from a TOML config")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.add_argument("--plot", action="store_true", help="also write trace.svg")
    s.set_defaults(func=cmd_solve)

    k = sub.add_parser("kernel", help="construct a kernel B making (A, B) monotone")
    k.add_argument("--matrix", required=True)
    k.add_argument("--method", required=True, choices=["perturbation", "symmetric", "factored"])
    k.add_argument("--a1")
    k.add_argument("--replacement", type=float, default=1.0)
    k.add_argument("--force", action="store_true", help="skip the perturbation hypothesis check")
    k.add_argument("--out", required=True)
    k.set_defaults(func=cmd_kernel)

    c = sub.add_parser("certify", help="certify or refute monotonicity of a pair")
    c.add_argument("--a")
    c.add_argument("--b", required=True)
    c.add_argument("--builtin", help="sample a built-in nonlinear operator instead of --a")
    c.add_argument("--half-width", type=float, default=3.0)
    c.add_argument("--samples", type=int, default=100_000)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_certify)

    r = sub.add_parser("reproduce", help="rerun a published experiment")
    r.add_argument("target", choices=sorted(TARGETS))
    r.add_argument("--out", required=True)
    r.add_argument("--no-plot", action="store_true")
    r.set_defaults(func=cmd_reproduce)

    t = sub.add_parser("rate", help="fit a linear convergence rate to a trace CSV")
    t.add_argument("--trace", required=True)
    t.set_defaults(func=cmd_rate)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
