"""Command-line driver for the cure-fraction toolkit.

Subcommands simulate datasets, trace the tail averages, evaluate the
cut-off selection objectives, estimate the cure fraction, and run the
replicated distributional checks.  Every command is a one-shot batch step:
it reads/writes CSV files, prints a short summary to stdout, and exits.

Exit codes: 0 success; 2 usage or parameter validation error; 3 data or
runtime failure (malformed CSV, empty tail, undefined plug-in, bad paths).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np
from scipy.stats import norm

from .asymptotics import CutoffRule, McConfig, run_mc, thinning_check
from .estimators import (
    choice_at_index,
    cv_m1_curve,
    cv_m2_curve,
    estimate_cure,
    select_cutoff,
    theoretical_cutoff_exponential,
    trace,
)
from .model import Exponential, MixtureSpec, read_csv, simulate, sort_with_concomitants, write_csv

_JSON_KEYS = (
    "pHat1",
    "pHat2",
    "cutIndex",
    "cutThreshold",
    "tailCount",
    "ciLo",
    "ciHi",
    "ksNormal",
    "ksHalfNormal",
)


def _write_json_summary(path: str, **fields) -> None:
    payload = {key: None for key in _JSON_KEYS}
    for key, value in fields.items():
        if key not in payload:
            raise ValueError(f"unknown summary key {key!r}")
        payload[key] = value
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _check_mixture_flags(args, parser, p_open: bool = False) -> MixtureSpec:
    if p_open:
        if not 0.0 < args.p < 1.0:
            parser.error("--p must lie strictly inside (0, 1)")
    elif not 0.0 <= args.p <= 1.0:
        parser.error("--p must lie in [0, 1]")
    if args.f_rate <= 0:
        parser.error("--f-rate must be positive")
    if args.g_rate <= 0:
        parser.error("--g-rate must be positive")
    return MixtureSpec(p=args.p, event=Exponential(args.f_rate), inspection=Exponential(args.g_rate))


def cmd_simulate(args) -> int:
    parser = args.parser
    spec = _check_mixture_flags(args, parser)
    if args.n < 1:
        parser.error("--n must be at least 1")
    sample = simulate(spec, args.n, args.seed)
    write_csv(sample, args.out)
    print(f"n={sample.n} delta_bar={float(np.mean(sample.delta)):.6g}")
    return 0


def cmd_trace(args) -> int:
    ss = sort_with_concomitants(read_csv(args.data))
    tr = trace(ss)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("index,y,p1,p2\n")
        for i, y, p1, p2 in zip(tr.index, tr.y, tr.p1, tr.p2):
            fh.write(f"{int(i)},{_fmt(y)},{_fmt(p1)},{_fmt(p2)}\n")
    print(f"n={tr.n} rows={tr.index.size} final_p2={tr.p2[-1]:.6g}")
    return 0


def cmd_cv(args) -> int:
    parser = args.parser
    if args.guard < 1:
        parser.error("--guard must be at least 1")
    ss = sort_with_concomitants(read_csv(args.data))
    m2 = cv_m2_curve(ss, variance_stat=args.variance_stat)
    try:
        m1 = cv_m1_curve(ss, variance_stat=args.variance_stat)
    except ValueError as exc:
        m1 = None
        print(f"warning: m1 objective unavailable: {exc}", file=sys.stderr)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("index,y,m1_var,m1_bias2,m1,m2_var,m2_bias2,m2\n")
        for row in range(m2.index.size):
            if m1 is not None:
                m1_cells = (
                    f"{_fmt(m1.variance[row])},{_fmt(m1.bias_sq[row])},{_fmt(m1.objective[row])}"
                )
            else:
                m1_cells = ",,"
            fh.write(
                f"{int(m2.index[row])},{_fmt(m2.y[row])},{m1_cells},"
                f"{_fmt(m2.variance[row])},{_fmt(m2.bias_sq[row])},{_fmt(m2.objective[row])}\n"
            )
    def report(flavor, curve):
        if curve is None:
            print(f"{flavor}: unavailable (alpha_hat invalid)")
            return
        try:
            pick = select_cutoff(curve, guard=args.guard)
        except ValueError as exc:
            print(f"warning: {flavor} selection unavailable: {exc}", file=sys.stderr)
            print(f"{flavor}: unavailable (no selectable cut-off)")
            return
        print(f"{flavor}: index={pick.index} threshold={pick.threshold:.6g}")

    report("m1", m1)
    report("m2", m2)
    return 0


def cmd_estimate(args) -> int:
    parser = args.parser
    if not 0.0 < args.alpha < 1.0:
        parser.error("--alpha must lie strictly inside (0, 1)")
    if args.guard is not None and args.guard < 1:
        parser.error("--guard must be at least 1")
    if args.method == "fixed-index" and (args.index is None or args.index < 1):
        parser.error("--method fixed-index needs --index >= 1")
    if args.method == "fixed-quantile" and (
        args.quantile is None or not 0.0 < args.quantile < 1.0
    ):
        parser.error("--method fixed-quantile needs --quantile in (0, 1)")
    if args.method == "theoretical-exp":
        if args.p is None or args.f_rate is None or args.g_rate is None:
            parser.error("--method theoretical-exp needs --p, --f-rate and --g-rate")
        if not 0.0 < args.p < 1.0:
            parser.error("--p must lie strictly inside (0, 1)")
        if args.f_rate <= 0 or args.g_rate <= 0:
            parser.error("--f-rate and --g-rate must be positive")

    ss = sort_with_concomitants(read_csv(args.data))
    tr = trace(ss)
    guard = args.guard if args.guard is not None else (5 if args.method.startswith("cv-") else 1)

    if args.method == "cv-m1":
        choice = select_cutoff(cv_m1_curve(ss), guard=guard)
    elif args.method == "cv-m2":
        choice = select_cutoff(cv_m2_curve(ss), guard=guard)
    elif args.method == "fixed-index":
        choice = choice_at_index(tr, args.index, method="fixed-index", guard=guard)
    elif args.method == "fixed-quantile":
        pos = min(tr.n, max(1, math.ceil(args.quantile * tr.n)))
        choice = choice_at_index(tr, pos, method="fixed-quantile", guard=guard)
    else:  # theoretical-exp
        print(
            "warning: theoretical-exp uses the oracle design parameters "
            "(--p/--f-rate/--g-rate), not the data",
            file=sys.stderr,
        )
        x_star = theoretical_cutoff_exponential(tr.n, args.p, args.f_rate, args.g_rate)
        pos = int(np.searchsorted(ss.y, x_star, side="left"))
        if pos == tr.n:
            raise ValueError(
                "theoretical cut-off exceeds the largest inspection time; the tail is empty"
            )
        choice = choice_at_index(tr, pos + 1, method="theoretical-exp", guard=guard)

    est = estimate_cure(tr, choice)
    z = float(norm.ppf(1.0 - args.alpha / 2.0))
    center = 1.0 - est.p_hat1
    half = z * math.sqrt(est.p_hat1 * (1.0 - est.p_hat1)) / math.sqrt(est.tail_count)
    ci_lo = max(0.0, center - half)
    ci_hi = min(1.0, center + half)

    print(f"n={tr.n} distinct_thresholds={tr.index.size}")
    print(
        f"cutoff: method={choice.method} index={est.index} "
        f"threshold={est.threshold:.6g} tail_count={est.tail_count}"
    )
    print(f"p_hat1={est.p_hat1:.6g} p_hat2={est.p_hat2:.6g}")
    print(f"event_fraction_ci=[{ci_lo:.6g}, {ci_hi:.6g}] level={1.0 - args.alpha:g}")
    if args.json_summary:
        _write_json_summary(
            args.json_summary,
            pHat1=est.p_hat1,
            pHat2=est.p_hat2,
            cutIndex=est.index,
            cutThreshold=est.threshold,
            tailCount=est.tail_count,
            ciLo=ci_lo,
            ciHi=ci_hi,
        )
    return 0


def cmd_mc(args) -> int:
    parser = args.parser
    spec = _check_mixture_flags(args, parser, p_open=True)
    if args.n < 1:
        parser.error("--n must be at least 1")
    if args.reps < 1:
        parser.error("--reps must be at least 1")
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    if args.cutoff == "fixed-x":
        if args.cutoff_x is None or args.cutoff_x < 0:
            parser.error("--cutoff fixed-x needs --cutoff-x >= 0")
        rule = CutoffRule(kind="fixed-x", x=args.cutoff_x)
    elif args.cutoff == "fixed-tail":
        if args.tail_count is None or args.tail_count < 1:
            parser.error("--cutoff fixed-tail needs --tail-count >= 1")
        rule = CutoffRule(kind="fixed-tail", tail=args.tail_count)
    else:
        rule = CutoffRule(kind=args.cutoff)
    config = McConfig(
        spec=spec,
        n=args.n,
        reps=args.reps,
        seed=args.seed,
        cutoff=rule,
        studentization=args.studentization,
    )
    res = run_mc(config, workers=args.threads)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("rep,z1,z2\n")
        for rep, z1, z2 in zip(res.rep_index, res.z1, res.z2):
            fh.write(f"{int(rep)},{_fmt(z1)},{_fmt(z2)}\n")
    print(
        f"reps={config.reps} retained={res.retained} skipped={res.skipped} "
        f"nonfinite={res.nonfinite}"
    )
    print(f"z1: mean={res.mean_z1:.6g} sd={res.sd_z1:.6g} ks_normal={res.ks_normal:.6g}")
    print(
        f"z2: mean={res.mean_z2:.6g} sd={res.sd_z2:.6g} "
        f"ks_half_normal={res.ks_half_normal:.6g}"
    )
    if args.json_summary:
        _write_json_summary(
            args.json_summary,
            ksNormal=res.ks_normal,
            ksHalfNormal=res.ks_half_normal,
        )
    return 0


def cmd_thinning(args) -> int:
    parser = args.parser
    spec = _check_mixture_flags(args, parser)
    if args.n < 1:
        parser.error("--n must be at least 1")
    if args.reps < 1:
        parser.error("--reps must be at least 1")
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    for target in args.target_mean:
        if not (0.0 < target <= args.n):
            parser.error("--target-mean entries must satisfy 0 < target <= n")
    stats = thinning_check(
        spec, args.n, args.target_mean, args.reps, args.seed, workers=args.threads
    )
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            "target_mean,threshold,mean_n1,mean_n0,"
            "var_over_mean_n1,var_over_mean_n0,corr_n1_n0\n"
        )
        for k in range(stats.target_mean.size):
            fh.write(
                f"{_fmt(stats.target_mean[k])},{_fmt(stats.threshold[k])},"
                f"{_fmt(stats.mean_n1[k])},{_fmt(stats.mean_n0[k])},"
                f"{_fmt(stats.var_over_mean_n1[k])},{_fmt(stats.var_over_mean_n0[k])},"
                f"{_fmt(stats.corr[k])}\n"
            )
    for k in range(stats.target_mean.size):
        print(
            f"target={stats.target_mean[k]:g} mean_n1={stats.mean_n1[k]:.6g} "
            f"mean_n0={stats.mean_n0[k]:.6g} corr={stats.corr[k]:.6g}"
        )
    return 0


def _add_mixture_flags(sub, required: bool = True) -> None:
    sub.add_argument("--p", type=float, required=required, help="cure fraction")
    sub.add_argument("--f-rate", type=float, required=required, help="event-time exponential rate")
    sub.add_argument(
        "--g-rate", type=float, required=required, help="inspection-time exponential rate"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curest",
        description="Cure-fraction estimation from current-status data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="draw a dataset and write delta,y CSV")
    _add_mixture_flags(p_sim)
    p_sim.add_argument("--n", type=int, required=True, help="sample size")
    p_sim.add_argument("--seed", type=int, default=0, help="RNG seed")
    p_sim.add_argument("--out", required=True, help="output CSV path")
    p_sim.set_defaults(func=cmd_simulate)

    p_tr = sub.add_parser("trace", help="tail averages per distinct threshold")
    p_tr.add_argument("--data", required=True, help="input delta,y CSV")
    p_tr.add_argument("--out", required=True, help="output CSV path (index,y,p1,p2)")
    p_tr.set_defaults(func=cmd_trace)

    p_cv = sub.add_parser("cv", help="cut-off selection objectives per threshold")
    p_cv.add_argument("--data", required=True, help="input delta,y CSV")
    p_cv.add_argument("--out", required=True, help="output CSV path")
    p_cv.add_argument("--guard", type=int, default=5, help="minimum tail count for selection")
    p_cv.add_argument(
        "--variance-stat",
        choices=("p1", "p2"),
        default="p1",
        help="tail statistic used inside the variance term",
    )
    p_cv.set_defaults(func=cmd_cv)

    p_est = sub.add_parser("estimate", help="cure estimates at a chosen cut-off")
    p_est.add_argument("--data", required=True, help="input delta,y CSV")
    p_est.add_argument(
        "--method",
        required=True,
        choices=("cv-m1", "cv-m2", "theoretical-exp", "fixed-index", "fixed-quantile"),
    )
    p_est.add_argument("--index", type=int, help="1-based cut-off index (fixed-index)")
    p_est.add_argument("--quantile", type=float, help="inspection quantile in (0,1) (fixed-quantile)")
    p_est.add_argument(
        "--guard",
        type=int,
        default=None,
        help="minimum tail count (default 5 for cv methods, 1 otherwise)",
    )
    p_est.add_argument("--alpha", type=float, default=0.05, help="CI significance level")
    _add_mixture_flags(p_est, required=False)
    p_est.add_argument("--json-summary", help="write machine-readable summary JSON here")
    p_est.set_defaults(func=cmd_estimate)

    p_mc = sub.add_parser("mc", help="replicated studentized tail statistics")
    _add_mixture_flags(p_mc)
    p_mc.add_argument("--n", type=int, required=True, help="sample size per replication")
    p_mc.add_argument("--reps", type=int, required=True, help="number of replications")
    p_mc.add_argument("--seed", type=int, default=0, help="base seed; replication k uses seed+k")
    p_mc.add_argument(
        "--cutoff",
        choices=("optimal", "undersmoothed", "fixed-x", "fixed-tail"),
        default="optimal",
    )
    p_mc.add_argument("--cutoff-x", type=float, help="threshold for --cutoff fixed-x")
    p_mc.add_argument("--tail-count", type=int, help="tail size for --cutoff fixed-tail")
    p_mc.add_argument(
        "--studentization", choices=("known-p", "plug-in"), default="known-p"
    )
    p_mc.add_argument("--out", required=True, help="output CSV path (rep,z1,z2)")
    p_mc.add_argument("--json-summary", help="write machine-readable summary JSON here")
    p_mc.add_argument(
        "--threads",
        type=int,
        default=os.cpu_count() or 1,
        help="worker processes (results are independent of this)",
    )
    p_mc.set_defaults(func=cmd_mc)

    p_th = sub.add_parser("thinning", help="tail counts split by indicator value")
    _add_mixture_flags(p_th)
    p_th.add_argument("--n", type=int, required=True, help="sample size per replication")
    p_th.add_argument("--reps", type=int, required=True, help="number of replications")
    p_th.add_argument("--seed", type=int, default=0, help="base seed; replication k uses seed+k")
    p_th.add_argument(
        "--target-mean",
        type=float,
        nargs="+",
        default=[20.0],
        help="expected tail sizes; thresholds are the matching inspection quantiles",
    )
    p_th.add_argument("--out", required=True, help="output CSV path")
    p_th.add_argument(
        "--threads",
        type=int,
        default=os.cpu_count() or 1,
        help="worker processes (results are independent of this)",
    )
    p_th.set_defaults(func=cmd_thinning)

    for name, sp in sub.choices.items():
        sp.set_defaults(parser=sp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
