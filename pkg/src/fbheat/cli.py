"""Command-line front end: ``fbheat {eval,zeros,verify,mc}``.

Exit codes: 0 success, 1 computation error or non-convergence, 2 refusal
(t below t_floor), 3 verification or Monte Carlo contract failure, 64 usage.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import os
import sys
from pathlib import Path

from . import __version__
from .envelopes import check_c_pair
from .errors import ComputationError, DomainError, RefusalError
from .kernels import EvalPoint, TruncationPolicy, bessel_kernel, jacobi_kernel
from .specfun import as_jacobi, as_order, zero_table
from .stochastic import SCHEMES, MCConfig, mc_vs_spectral
from .verify import DEFAULT_NUS, SUITES, GridSpec, log_times, run_suite

EXIT_OK, EXIT_ERROR, EXIT_REFUSAL, EXIT_FAILED, EXIT_USAGE = 0, 1, 2, 3, 64
SCHEMA_VERSION = 1
OUTPUT_DIR_ENV = "FBHEAT_OUTPUT_DIR"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _output_dir(arg):
    if arg:
        return Path(arg)
    return Path(os.environ.get(OUTPUT_DIR_ENV, "."))


def _emit(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        path = Path(out)
        if not path.is_absolute() and os.environ.get(OUTPUT_DIR_ENV):
            path = Path(os.environ[OUTPUT_DIR_ENV]) / path
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)


def _dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _gnuplot(data_file, xcol, ycol, title, errcol=None, logy=False):
    lines = ["set datafile separator ','", "set key autotitle columnhead",
             f"set title '{title}'"]
    if logy:
        lines.append("set logscale y")
    style = f"using {xcol}:{ycol}:{errcol} with yerrorbars" if errcol else f"using {xcol}:{ycol} with linespoints"
    lines.append(f"plot '{data_file}' {style}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# eval

def cmd_eval(a) -> int:
    pol = TruncationPolicy(tol=a.tol, max_terms=a.max_terms, t_floor=a.t_floor)
    points = [EvalPoint(a.t, x, y) for x, y in itertools.product(a.x, a.y)]
    if a.kernel == "jacobi":
        p = as_jacobi((a.nu if a.alpha is None else a.alpha, a.beta))
        ker = jacobi_kernel(p.alpha, p.beta, pol)
        run = lambda pt: ker.evaluate(pt.t, pt.x, pt.y).item()
    else:
        ker = bessel_kernel(as_order(a.nu), pol)
        method = ker.g if a.kernel == "g" else ker.k
        run = lambda pt: method(pt.t, pt.x, pt.y).item()
    results = [(pt, run(pt)) for pt in points]
    rows = [{"nu": a.nu, "t": pt.t, "x": pt.x, "y": pt.y, "value": r.value, "terms": r.terms_used,
             "tail_bound": r.tail_bound, "converged": r.converged, "roundoff": r.roundoff,
             "clamped": r.clamped, "limit": r.limit} for pt, r in results]
    if a.format == "json":
        text = _dumps({"schema_version": SCHEMA_VERSION, "kernel": a.kernel,
                       "beta": a.beta if a.kernel == "jacobi" else None,
                       "records": [{k: _json_num(v) for k, v in r.items()} for r in rows]})
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["nu", "t", "x", "y", "value", "terms", "tail_bound"])
        for r in rows:
            w.writerow([repr(float(r["nu"])), repr(r["t"]), repr(r["x"]), repr(r["y"]),
                        repr(float(r["value"])), r["terms"], repr(float(r["tail_bound"]))])
        text = buf.getvalue()
    _emit(text, a.out)
    if a.gnuplot:
        _emit(_gnuplot(a.out or "eval.csv", 3, 5, f"{a.kernel} kernel, nu={a.nu}, t={a.t}"), a.gnuplot)
    return EXIT_OK if all(r.converged for _, r in results) else EXIT_ERROR


def _json_num(v):
    if isinstance(v, float) and v != v:
        return "nan"
    if isinstance(v, float) and v in (float("inf"), float("-inf")):
        return "inf" if v > 0 else "-inf"
    return v


# ---------------------------------------------------------------------------
# zeros

def cmd_zeros(a) -> int:
    table = zero_table(as_order(a.nu), a.count)
    if a.format == "json":
        text = _dumps({"schema_version": SCHEMA_VERSION, "nu": table.nu,
                       "certified_abs_error": table.certified_abs_error,
                       "zeros": [{"n": n + 1, "lambda": float(table.zeros[n]),
                                  "residual": float(table.residuals[n])} for n in range(a.count)]})
    else:
        buf = io.StringIO()
        table.to_csv(buf, count=a.count)
        text = buf.getvalue()
    _emit(text, a.out)
    if a.gnuplot:
        _emit(_gnuplot(a.out or "zeros.csv", 1, 2, f"zeros of J_nu, nu={a.nu}"), a.gnuplot)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify

def cmd_verify(a) -> int:
    check_c_pair(a.c1, a.c2)
    times = log_times(a.t_min, a.T, a.per_decade)
    grid = GridSpec.default(a.T, a.nu, a.tol, a.t_min, a.per_decade)
    grid = GridSpec(grid.nu_list, a.T, times, grid.space_points, a.tol)
    for _ in range(a.refine):
        grid = grid.refine()
    report = run_suite(a.suite, grid, (a.c1, a.c2), a.threads, seed=a.seed)
    out_dir = _output_dir(a.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    name = f"verify_{a.suite}.{a.format}"
    path = out_dir / name
    path.write_text(report.to_json() + "\n" if a.format == "json" else report.to_csv())
    if a.gnuplot:
        (out_dir / "verify_constants.csv").write_text(_constants_csv(report))
        (out_dir / "verify_constants.gp").write_text(
            _gnuplot("verify_constants.csv", 1, 2, "empirical constants by order", logy=True))
    for r in report.records:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.check_name} nu={r.nu!r}")
    for nu, consts in report.constants.items():
        if "C_hat" in consts:
            print(f"C_hat nu={nu}: {consts['C_hat']:.6g}")
    print(f"report: {path}")
    return EXIT_OK if report.passed else EXIT_FAILED


def _constants_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["nu", "C_hat"])
    for nu, consts in report.constants.items():
        if "C_hat" in consts:
            w.writerow([nu, repr(float(consts["C_hat"]))])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# mc

def cmd_mc(a) -> int:
    cfg = MCConfig(a.nu, a.t, a.x0, a.paths, a.dt, a.seed, a.bins, a.scheme)
    if cfg.paths < 10000:
        raise UsageError("mc comparison needs --paths >= 10000")
    cmp = mc_vs_spectral(cfg, a.threads)
    out_dir = _output_dir(a.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "mc_histogram.csv").write_text(cmp.result.histogram_csv())
    summary = {k: _json_num(v) for k, v in cmp.to_dict().items()}
    (out_dir / "mc_summary.json").write_text(_dumps(summary))
    if a.gnuplot:
        (out_dir / "mc_histogram.gp").write_text(
            _gnuplot("mc_histogram.csv", 1, 2, f"Monte Carlo density, nu={cfg.nu}, t={cfg.t}", errcol=3))
    r = cmp.result
    print(f"survival {r.survival_prob:.6f} +- {r.survival_stderr:.6f} spectral {cmp.spectral_mass:.6f} "
          f"z={cmp.mass_z:.3f}")
    print(f"bins within 3 stderr: {cmp.fraction_within:.3f} of {cmp.dof}; chi2={cmp.chi_square:.3f}; "
          f"unstable={r.unstable}")
    print(f"{'PASS' if cmp.passed else 'FAIL'} mc_vs_spectral")
    return EXIT_OK if cmp.passed else EXIT_FAILED


# ---------------------------------------------------------------------------
# parser

def _positive(kind):
    def conv(s):
        v = kind(s)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {s}")
        return v
    return conv


def _order(s):
    v = float(s)
    if not v > -1.0:
        raise argparse.ArgumentTypeError(f"nu must exceed -1, got {s}")
    return v


def _unit(s):
    v = float(s)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {s}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fbheat", description="Fourier-Bessel heat kernels: evaluation and verification.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("eval", help="evaluate a heat kernel")
    e.add_argument("--kernel", choices=("g", "k", "jacobi"), default="g")
    e.add_argument("--nu", type=_order, required=True, help="order (alpha for --kernel jacobi)")
    e.add_argument("--alpha", type=_order, default=None)
    e.add_argument("--beta", type=_order, default=0.5)
    e.add_argument("--t", type=_positive(float), required=True)
    e.add_argument("--x", type=_unit, nargs="+", required=True)
    e.add_argument("--y", type=_unit, nargs="+", required=True)
    e.add_argument("--tol", type=_positive(float), default=1e-12)
    e.add_argument("--max-terms", type=_positive(int), default=20000)
    e.add_argument("--t-floor", type=_positive(float), default=1e-6)
    _common_output(e, file_out=True)

    z = sub.add_parser("zeros", help="tabulate zeros of J_nu")
    z.add_argument("--nu", type=_order, required=True)
    z.add_argument("--count", type=_positive(int), required=True)
    _common_output(z, file_out=True)

    v = sub.add_parser("verify", help="run verification scans")
    v.add_argument("--suite", choices=SUITES + ("all",), default="all")
    v.add_argument("--nu", type=_order, nargs="+", default=list(DEFAULT_NUS))
    v.add_argument("--T", type=_positive(float), default=1.0)
    v.add_argument("--t-min", type=_positive(float), default=1e-3)
    v.add_argument("--per-decade", type=_positive(int), default=12)
    v.add_argument("--refine", type=int, default=0, help="number of x2 grid refinements")
    v.add_argument("--c1", type=_positive(float), default=0.35)
    v.add_argument("--c2", type=_positive(float), default=0.20)
    v.add_argument("--tol", type=_positive(float), default=1e-12)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--threads", type=_positive(int), default=1)
    _common_output(v, file_out=False)

    m = sub.add_parser("mc", help="Monte Carlo cross-check against the eigen-series")
    m.add_argument("--nu", type=_order, required=True)
    m.add_argument("--t", type=_positive(float), default=0.2)
    m.add_argument("--x0", type=float, default=0.5)
    m.add_argument("--paths", type=int, default=100000)
    m.add_argument("--dt", type=_positive(float), default=1e-4)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--bins", type=_positive(int), default=20)
    m.add_argument("--scheme", choices=SCHEMES, default="euler")
    m.add_argument("--threads", type=_positive(int), default=1)
    _common_output(m, file_out=False)
    return p


def _common_output(p, file_out):
    p.add_argument("--format", choices=("csv", "json"), default="csv" if file_out else "json")
    if file_out:
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--gnuplot", default=None, help="also write a gnuplot script to this path")
    else:
        p.add_argument("--out-dir", default=None,
                       help=f"output directory (default ${OUTPUT_DIR_ENV} or the current directory)")
        p.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script")


COMMANDS = {"eval": cmd_eval, "zeros": cmd_zeros, "verify": cmd_verify, "mc": cmd_mc}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except RefusalError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSAL
    except (DomainError, UsageError) as exc:
        print(f"fbheat: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ComputationError, ArithmeticError, OSError) as exc:
        print(f"fbheat: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
