"""Command-line interface: ``posthoc <subcommand> [flags]``.

Results go to stdout as JSON (or CSV for the simulation commands),
diagnostics to stderr. Exit status is 2 for bad flags, 1 for domain errors
and 0 otherwise.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import evalues as ev
from .errors import PosthocError
from .intervals import ConfSeqHandle, METHODS, Method, anchor_lambda, cs_rws
from .risk import AlphaSearchConfig, type1_iwr, type1_mix_iwr, type1_reg, type1_rws
from .sampling import FAMILIES, Generator
from .simulate import (WIDTH_CHECKPOINTS, RiskExperimentConfig, anchor_ratio_grid, default_ratio_grid,
                       width_methods, ratio_csv, risk_csv, risk_experiment, risk_methods,
                       width_experiment, widths_csv)
from .summary import SampleSummary, read_values, summarize

DEFAULT_ANCHOR = 0.05
EVALUE_METHODS = ("iwr", "mix-iwr", "rws", "reg", "mix-reg", "sn")
TYPE1_METHODS = ("iwr", "mix-iwr", "reg", "rws")


class UsageError(Exception):
    pass


def _summary_arg(text: str) -> SampleSummary:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected n,mean,ssd")
    try:
        n = int(parts[0])
        mean, ssd = float(parts[1]), float(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse summary {text!r}") from None
    if n < 0 or ssd < 0 or not (math.isfinite(mean) and math.isfinite(ssd)):
        raise argparse.ArgumentTypeError("summary needs n >= 0, finite mean and ssd >= 0")
    return SampleSummary(n, mean, ssd)


def _num(x):
    """JSON-safe float: infinities and NaN become null."""
    x = float(x)
    return x if math.isfinite(x) else None


def _add_data(p, summary=True):
    g = p.add_argument_group("input")
    g.add_argument("--data", help="file of numbers, one per line, or CSV with --column ('-' for stdin)")
    g.add_argument("--column", help="CSV column name or 0-based index")
    if summary:
        g.add_argument("--summary", type=_summary_arg, metavar="N,MEAN,SSD",
                       help="sufficient statistics instead of a data file")


def _add_params(p):
    g = p.add_argument_group("method parameters")
    g.add_argument("--lambda", dest="lam", type=float, help="IWR/REG tuning parameter")
    g.add_argument("--anchor", type=float,
                   help=f"set lambda = sqrt(2 log(2/anchor)); default anchor {DEFAULT_ANCHOR}")
    g.add_argument("--r", type=float, default=20.0, help="mixture truncation radius R")
    g.add_argument("--kappa", type=float, default=1.0, help="mixture scale")
    g.add_argument("--rho", type=float, default=2.0)
    g.add_argument("--delta", type=float, default=1.0)
    g.add_argument("--c", type=float, default=100.0, help="R-WS truncation constant")
    g.add_argument("--eta", type=float, default=1e-3, help="REG regularizer")


def _add_seed(p):
    p.add_argument("--seed", type=int, help="master seed (fallback: $POSTHOC_SEED, then 0)")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--out", help="CSV output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="posthoc", description="Post-hoc valid intervals, e-values and risk audits.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ci", help="confidence interval for the mean")
    p.add_argument("--method", choices=METHODS, required=True)
    p.add_argument("--alpha", type=float, required=True)
    _add_data(p)
    _add_params(p)

    for name, what in (("evalue", "e-value"), ("pvalue", "post-hoc p-value (1/e)")):
        p = sub.add_parser(name, help=f"{what} for H0: mean = theta")
        p.add_argument("--method", choices=EVALUE_METHODS, required=True)
        p.add_argument("--theta", type=float, required=True)
        _add_data(p)
        _add_params(p)
        p.add_argument("--sn-rule", choices=("horizon", "power"), default="horizon")
        p.add_argument("--sn-c", type=float, default=1.0)
        p.add_argument("--sn-p", type=float, default=1.0)

    p = sub.add_parser("confseq", help="post-hoc confidence sequence after a burn-in")
    p.add_argument("--burn-in", dest="burn_in", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--rho", type=float, default=2.0)
    p.add_argument("--range-c", dest="range_c", type=float, default=0.01,
                   help="constant of the valid-range floor range_c * m^-0.24")
    _add_data(p, summary=False)

    p = sub.add_parser("type1", help="exact asymptotic type-I error")
    p.add_argument("--method", choices=TYPE1_METHODS, required=True)
    p.add_argument("--alpha", type=float, required=True)
    _add_params(p)

    p = sub.add_parser("sim-widths", help="interval widths on prefixes of one stream (CSV)")
    _add_seed(p)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--family", choices=FAMILIES, default="gaussian")
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--df", type=int, default=3)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--checkpoints", default=",".join(map(str, WIDTH_CHECKPOINTS)))

    p = sub.add_parser("sim-risk", help="empirical post-hoc risk table (CSV)")
    _add_seed(p)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--sigma", type=float, default=2.0)
    p.add_argument("--alpha-max", dest="alpha_max", type=float, default=500.0)
    p.add_argument("--methods", default="wald,iwr,mix-iwr,rws",
                   help="comma-separated subset of the table methods")

    p = sub.add_parser("sim-ratio", help="anchoring ratio R(alpha, alpha0) on a grid (CSV)")
    p.add_argument("--out")
    p.add_argument("--points", type=int, default=400)
    return parser


# ------------------------------------------------------------------ helpers


def _load_summary(args) -> SampleSummary:
    if getattr(args, "summary", None) is not None:
        if args.data is not None:
            raise UsageError("give either --data or --summary, not both")
        return args.summary
    return summarize(_load_data(args))


def _load_data(args) -> np.ndarray:
    if args.data is None:
        raise UsageError("one of --data or --summary is required" if hasattr(args, "summary")
                         else "--data is required")
    column = args.column
    try:
        if args.data == "-":
            return read_values(sys.stdin, column)
        return read_values(args.data, column)
    except OSError as exc:
        raise UsageError(f"cannot read {args.data}: {exc.strerror}") from None


def _lambda(args):
    if args.lam is not None and args.anchor is not None:
        raise UsageError("give either --lambda or --anchor, not both")
    if args.lam is not None:
        return args.lam, None
    anchor = DEFAULT_ANCHOR if args.anchor is None else args.anchor
    return anchor_lambda(anchor), anchor


def _method(args) -> tuple[Method, float | None]:
    lam, anchor = (None, None)
    if args.method in ("iwr", "reg"):
        lam, anchor = _lambda(args)
    return Method(args.method, lam=lam, r=args.r, kappa=args.kappa, rho=args.rho,
                  delta=args.delta, c=args.c, eta=args.eta), anchor


def _params_meta(m: Method, anchor):
    meta = m.params()
    if anchor is not None:
        meta["anchor"] = anchor
    return meta


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("POSTHOC_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"POSTHOC_SEED must be an integer, got {env!r}") from None


def _emit_csv(text: str, out):
    if out is None:
        sys.stdout.write(text)


# ----------------------------------------------------------------- commands


def cmd_ci(args):
    if args.method == "wald" and not 0 < args.alpha < 1:
        raise UsageError("wald is not post-hoc valid: alpha must lie in (0, 1)")
    summary = _load_summary(args)
    m, anchor = _method(args)
    iv = m.interval(summary, args.alpha)
    return {"lo": _num(iv.lo), "hi": _num(iv.hi), "kind": iv.kind, "vacuous": iv.vacuous,
            "flags": list(iv.flags), "n": int(summary.n), "alpha": args.alpha,
            "method": m.name, "params": _params_meta(m, anchor)}


def _evalue(args):
    theta = args.theta
    if args.method == "sn":
        if getattr(args, "summary", None) is not None:
            raise UsageError("sn needs the ordered data stream (--data), not --summary")
        sched = ev.SnSchedule(args.sn_rule, args.sn_c, args.sn_p)
        return float(ev.e_sn(_load_data(args), theta, sched)), {"rule": args.sn_rule, "c": args.sn_c}
    summary = _load_summary(args)
    m, anchor = _method(args)
    if m.name == "iwr":
        value = ev.e_iwr(summary, theta, m.lam)
    elif m.name == "mix-iwr":
        value = ev.e_mix_iwr(summary, theta, m.mix)
    elif m.name == "rws":
        value = ev.e_rws(summary, theta, m.rws)
    elif m.name == "reg":
        value = ev.e_reg(summary, theta, ev.RegParams(m.lam, m.eta))
    else:
        value = ev.e_mix_reg(summary, theta, m.mix, m.eta)
    return float(value), _params_meta(m, anchor)


def cmd_evalue(args):
    value, params = _evalue(args)
    return {"value": _num(value), "method": args.method, "theta": args.theta, "params": params}


def cmd_pvalue(args):
    value, params = _evalue(args)
    return {"value": _num(ev.e_to_pvalue(value)), "method": args.method, "theta": args.theta,
            "params": params}


def cmd_confseq(args):
    data = _load_data(args)
    h = ConfSeqHandle.start(data, args.burn_in, ev.RwsParams(rho=args.rho), range_c=args.range_c)
    rows = []
    for i in range(args.burn_in, len(data) + 1):
        if i > args.burn_in:
            h = h.advance(data[i - 1])
        iv = cs_rws(h, args.alpha)
        rows.append({"k": h.k, "lo": _num(iv.lo), "hi": _num(iv.hi), "kind": iv.kind,
                     "out_of_range": "out_of_range" in iv.flags})
    return {"alpha": args.alpha, "burn_in": args.burn_in, "range_floor": h.range_floor,
            "intervals": rows}


def cmd_type1(args):
    if args.method == "iwr":
        lam, anchor = _lambda(args)
        err, params = type1_iwr(args.alpha, lam), {"lambda": lam, "anchor": anchor}
    elif args.method == "reg":
        lam, anchor = _lambda(args)
        err = type1_reg(args.alpha, lam, args.eta)
        params = {"lambda": lam, "anchor": anchor, "eta": args.eta}
    elif args.method == "mix-iwr":
        err = type1_mix_iwr(args.alpha, ev.MixParams(args.r, args.kappa))
        params = {"r": args.r, "kappa": args.kappa}
    else:
        err, params = type1_rws(), {}
    return {"error": err, "method": args.method, "alpha": args.alpha, "params": params}


def cmd_sim_widths(args):
    try:
        cps = [int(c) for c in args.checkpoints.split(",")]
    except ValueError:
        raise UsageError("--checkpoints must be comma-separated integers") from None
    gen = Generator(args.family, loc=args.mu, scale=args.sigma, df=args.df, p=args.p, seed=_seed(args))
    curves = width_experiment(width_methods(args.alpha), gen, cps, args.alpha)
    _emit_csv(widths_csv(curves, args.out), args.out)


def cmd_sim_risk(args):
    wanted = [s.strip() for s in args.methods.split(",") if s.strip()]
    table = {m.name: m for m in risk_methods()}
    unknown = [w for w in wanted if w not in table]
    if unknown or not wanted:
        raise UsageError(f"--methods must be a subset of {','.join(table)}")
    cfg = RiskExperimentConfig(n=args.n, trials=args.trials, sigma=args.sigma, seed=_seed(args),
                               methods=tuple(table[w] for w in wanted),
                               search=AlphaSearchConfig(alpha_max=args.alpha_max))
    reports = risk_experiment(cfg, workers=args.workers)
    _emit_csv(risk_csv(reports, args.out), args.out)


def cmd_sim_ratio(args):
    if args.points < 1:
        raise UsageError("--points must be positive")
    grid = default_ratio_grid(args.points)
    _emit_csv(ratio_csv(grid, grid, anchor_ratio_grid(grid, grid), args.out), args.out)


COMMANDS = {"ci": cmd_ci, "evalue": cmd_evalue, "pvalue": cmd_pvalue, "confseq": cmd_confseq,
            "type1": cmd_type1, "sim-widths": cmd_sim_widths, "sim-risk": cmd_sim_risk,
            "sim-ratio": cmd_sim_ratio}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        payload = COMMANDS[args.command](args)
    except UsageError as exc:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        sub.print_usage(sys.stderr)
        print(f"posthoc {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except PosthocError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if payload is not None:
        json.dump(payload, sys.stdout)
        sys.stdout.write("\n")
    return 0


def main():
    sys.exit(run())
