"""Trace and certificate output: JSONL/CSV rows, JSON certificates and figures."""

import csv
import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .numerics import mpq, to_rational  # noqa: E402

TRACE_KEYS = ("t", "mu", "sigma_sq", "gap", "min_xs", "max_xs")


def fmt_rational(v):
    v = to_rational(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def fmt_value(v, exact):
    if isinstance(v, int):
        return v
    if exact:
        return fmt_rational(v)
    return float(v)


def write_trace_jsonl(trace, path):
    with open(path, "w") as fh:
        for row in trace.as_dicts():
            fh.write(json.dumps({k: fmt_value(row[k], trace.exact) for k in TRACE_KEYS}) + "\n")


def read_trace_jsonl(path):
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                rows.append(json.loads(line))
    return rows


def write_trace_csv(trace, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_KEYS)
        for row in trace.as_dicts():
            w.writerow([row["t"]] + [repr(_as_float(row[k])) for k in TRACE_KEYS[1:]])


def _as_float(v):
    if isinstance(v, str):
        v = mpq(v)
    try:
        return float(v)
    except OverflowError:
        return math.inf


def _log10(v):
    """log10 of a positive rational or float without underflow."""
    if isinstance(v, float):
        return math.log10(v) if v > 0 else -math.inf
    v = to_rational(v)
    if v <= 0:
        return -math.inf
    return math.log10(int(v.numerator)) - math.log10(int(v.denominator))


def plot_trace(trace, outdir, sigma_bound_sq=0.25, stem="trace"):
    """Render the figures of a trace into ``outdir``; returns the file paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = trace.as_dicts()
    t = [r["t"] for r in rows]
    log_mu = [_log10(r["mu"]) for r in rows]
    log_gap = [_log10(r["gap"]) for r in rows]
    paths = []

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(t, log_mu, label="log10 mu")
    ax.plot(t, log_gap, label="log10 gap", linestyle="--")
    ax.set_xlabel("iteration")
    ax.set_ylabel("log10")
    ax.legend()
    ax.set_title("barrier parameter and duality gap")
    fig.tight_layout()
    paths.append(outdir / f"{stem}_mu.png")
    fig.savefig(paths[-1], dpi=120)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(6, 4))
    sig = [max(_as_float(r["sigma_sq"]), 1e-300) for r in rows]
    ax.semilogy(t, sig, label="sigma^2")
    ax.axhline(float(sigma_bound_sq), color="red", linestyle=":", label="bound")
    ax.set_xlabel("iteration")
    ax.set_ylabel("sigma^2")
    ax.legend()
    ax.set_title("proximity to the central path")
    fig.tight_layout()
    paths.append(outdir / f"{stem}_sigma.png")
    fig.savefig(paths[-1], dpi=120)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(6, 4))
    lo = [_ratio(r["min_xs"], r["mu"]) for r in rows]
    hi = [_ratio(r["max_xs"], r["mu"]) for r in rows]
    ax.plot(t, lo, label="min x_i s_i / mu")
    ax.plot(t, hi, label="max x_i s_i / mu")
    ax.axhline(0.5, color="grey", linestyle=":")
    ax.axhline(1.5, color="grey", linestyle=":")
    ax.set_xlabel("iteration")
    ax.legend()
    ax.set_title("complementarity products relative to mu")
    fig.tight_layout()
    paths.append(outdir / f"{stem}_products.png")
    fig.savefig(paths[-1], dpi=120)
    plt.close(fig)
    return paths


def _ratio(a, b):
    if isinstance(a, float) or isinstance(b, float):
        return float(a) / float(b)
    return _as_float(to_rational(a) / to_rational(b))


def certificate_dict(result, names=None):
    """JSON-ready form of a run result; rationals as ``"p/q"`` strings."""
    std = result.standard
    names = names or std.var_names
    out = {"status": result.status, "variables": list(names),
           "objective_sign": std.objective_sign}
    cert = result.certificate
    if cert is not None:
        for key in ("x", "y", "s", "ray"):
            vec = getattr(cert, key)
            if vec is not None:
                out[key] = [fmt_rational(v) for v in vec]
        if cert.objective is not None:
            out["objective"] = fmt_rational(std.objective_sign * cert.objective)
        if cert.aux is not None and cert.status == "infeasible":
            out["aux"] = {k: [fmt_rational(v) for v in getattr(cert.aux, k)] for k in ("x", "y", "s")}
        if cert.reason:
            out["reason"] = cert.reason
    if result.approximate is not None:
        a = result.approximate
        out["x"] = [float(v) for v in a.x]
        out["objective"] = float(a.objective)
        out["mu"] = a.mu
        out["gap"] = a.gap
        out["aux"] = {"x": [float(v) for v in a.aux_x], "y": [float(v) for v in a.aux_y],
                      "s": [float(v) for v in a.aux_s]}
    if result.path is not None:
        out["iterations"] = result.path.iterations
        out["iteration_bound"] = result.path.bound
    return out
