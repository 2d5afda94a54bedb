"""Command line interface.

    ipmlp solve FILE [--mode exact|float] [--rule main|alt] [--mu-target X]
                     [--trace out.jsonl] [--max-iters N] [--certificate out.json]
                     [--report DIR]
    ipmlp solve --batch FILE... [--jobs N]
    ipmlp oracle FILE
    ipmlp check FILE CERTIFICATE.json
    ipmlp plot TRACE.jsonl --out DIR

``solve`` prints tab-separated ``key<TAB>value`` lines.  Exit status: 0
optimal (or an approximate point), 2 infeasible, 3 unbounded, 4 input
error, 5 internal failure.  ``check`` exits 0 for a valid certificate and 1
for a rejected one.
"""

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import oracle, report
from .errors import LPError, ParseError
from .lpformat import load_problem
from .model import to_standard_form
from .numerics import RATIONAL, to_rational
from .path import DEFAULT_CHECK_INTERVAL, DEFAULT_MAX_ITERS, Trace, TraceRow
from .solver import RunConfig, run, verify_certificate

EXIT = {"optimal": 0, "approximate": 0, "infeasible": 2, "unbounded": 3}
EXIT_INPUT = 4
EXIT_INTERNAL = 5
EXIT_REJECTED = 1


def _emit(out, key, *values):
    out.write("\t".join([key] + [str(v) for v in values]) + "\n")


def _value_text(v, exact):
    return report.fmt_rational(v) if exact else repr(float(v))


def _config(args):
    mu_target = args.mu_target
    if mu_target is not None and args.mode == "float":
        mu_target = float(mu_target)
    return RunConfig(
        mode=args.mode,
        rule=args.rule,
        mu_target=mu_target,
        max_iters=args.max_iters,
        trace_path=args.trace,
        check_interval=args.check_interval,
        delta=None if args.delta is None else to_rational(args.delta),
        record_exact=bool(args.trace) and args.mode == "exact",
    )


def solve_file(path, args, out=None):
    problem = load_problem(path)
    config = _config(args)
    result = run(config, problem)
    names = result.standard.var_names
    _emit(out, "status", result.status)
    exact = result.approximate is None or config.exact
    if result.objective is not None:
        _emit(out, "objective", _value_text(result.objective, exact))
    if result.path is not None:
        _emit(out, "iterations", result.path.iterations)
        _emit(out, "iteration_bound", result.path.bound)
    cert = result.certificate
    if cert is not None and cert.reason:
        _emit(out, "reason", cert.reason)
    x = cert.x if cert is not None else (result.approximate.x if result.approximate else None)
    if x is not None:
        for name, v in zip(names, x):
            _emit(out, "x", name, _value_text(v, exact))
    if cert is not None and cert.ray is not None:
        for name, v in zip(names, cert.ray):
            _emit(out, "ray", name, report.fmt_rational(v))
    if cert is not None and cert.y is not None:
        for i, v in enumerate(cert.y):
            _emit(out, "y", i + 1, report.fmt_rational(v))
    if result.approximate is not None:
        _emit(out, "gap", _value_text(result.approximate.gap, exact))
    if args.trace and result.trace is not None:
        report.write_trace_jsonl(result.trace, args.trace)
        _emit(out, "trace", args.trace)
    if args.certificate:
        Path(args.certificate).write_text(json.dumps(report.certificate_dict(result), indent=1) + "\n")
        _emit(out, "certificate", args.certificate)
    if args.report and result.trace is not None:
        outdir = Path(args.report)
        outdir.mkdir(parents=True, exist_ok=True)
        report.write_trace_csv(result.trace, outdir / "trace.csv")
        _emit(out, "report", outdir / "trace.csv")
        for fig in report.plot_trace(result.trace, outdir, result.path.rule.sigma_bound_sq):
            _emit(out, "figure", fig)
    return EXIT[result.status]


def _batch_one(item):
    path, args = item
    try:
        problem = load_problem(path)
        result = run(_config(args), problem)
        obj = "" if result.objective is None else report.fmt_rational(result.objective) \
            if result.approximate is None else repr(float(result.objective))
        return path, result.status, obj, EXIT[result.status]
    except LPError as exc:
        return path, exc.code, str(exc), exc.exit_status


def cmd_solve(args, out=None):
    if args.batch:
        items = [(f, args) for f in args.files]
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                rows = list(pool.map(_batch_one, items))
        else:
            rows = [_batch_one(it) for it in items]
        for path, status, obj, _ in rows:
            _emit(out, path, status, obj)
        codes = [code for *_, code in rows if code in (EXIT_INPUT, EXIT_INTERNAL)]
        return max(codes) if codes else 0
    if len(args.files) != 1:
        raise ParseError("solve takes exactly one file unless --batch is given")
    return solve_file(args.files[0], args, out)


def cmd_oracle(args, out=None):
    problem = load_problem(args.file)
    std = to_standard_form(problem, RATIONAL)
    res = oracle.classify(std, cap=args.cap)
    _emit(out, "status", res.status)
    _emit(out, "vertices", len(res.vertices))
    if res.status == "optimal":
        _emit(out, "objective", report.fmt_rational(std.objective_sign * res.objective))
        for v in res.vertices.optimal:
            _emit(out, "optimal_vertex", " ".join(report.fmt_rational(t) for t in v.x))
    if res.ray is not None:
        _emit(out, "ray", " ".join(report.fmt_rational(t) for t in res.ray))
    return EXIT[res.status]


def cmd_check(args, out=None):
    problem = load_problem(args.file)
    try:
        data = json.loads(Path(args.certificate).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read certificate: {exc}") from exc
    try:
        status = verify_certificate(problem, data)
    except (LPError, ValueError, ZeroDivisionError) as exc:
        _emit(out, "rejected", str(exc))
        return EXIT_REJECTED
    _emit(out, "valid", status)
    return 0


def cmd_plot(args, out=None):
    rows = report.read_trace_jsonl(args.trace)
    exact = any(isinstance(r.get("mu"), str) for r in rows)
    conv = (lambda v: to_rational(v)) if exact else float
    trace = Trace([TraceRow(r["t"], *(conv(r[k]) for k in report.TRACE_KEYS[1:])) for r in rows],
                  exact=exact)
    for fig in report.plot_trace(trace, args.out, args.sigma_bound_sq):
        _emit(out, "figure", fig)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="ipmlp", description="Exact short-step interior-point LP solver.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve an LP file")
    s.add_argument("files", nargs="+")
    s.add_argument("--mode", choices=("exact", "float"), default="exact")
    s.add_argument("--rule", choices=("main", "alt"), default="main")
    s.add_argument("--delta", help="step parameter of the alternative rule (at most 1/6)")
    s.add_argument("--mu-target", dest="mu_target",
                   help="stop once mu falls below this value (exact mode: no certificate if above mu_f)")
    s.add_argument("--trace", help="write per-iteration rows as JSON lines")
    s.add_argument("--max-iters", dest="max_iters", type=int, default=DEFAULT_MAX_ITERS)
    s.add_argument("--check-interval", dest="check_interval", type=int, default=DEFAULT_CHECK_INTERVAL,
                   help="float mode: full invariant check every K iterations")
    s.add_argument("--certificate", help="write the result as JSON")
    s.add_argument("--report", help="directory for trace.csv and figures")
    s.add_argument("--batch", action="store_true", help="solve every file, one summary line each")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_solve)

    o = sub.add_parser("oracle", help="classify by vertex enumeration")
    o.add_argument("file")
    o.add_argument("--cap", type=int, default=oracle.DEFAULT_CAP)
    o.set_defaults(func=cmd_oracle)

    c = sub.add_parser("check", help="re-verify a certificate exactly")
    c.add_argument("file")
    c.add_argument("certificate")
    c.set_defaults(func=cmd_check)

    p = sub.add_parser("plot", help="render figures from a JSONL trace")
    p.add_argument("trace")
    p.add_argument("--out", required=True)
    p.add_argument("--sigma-bound-sq", dest="sigma_bound_sq", type=float, default=0.25)
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, sys.stdout)
    except LPError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return exc.exit_status
    except ValueError as exc:
        print(f"error[input]: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
