"""Command-line interface.

Scalar reports go to standard output as JSON, sequences as CSV, diagnostics
to standard error.  Exit codes: 0 success, 2 argument or domain error,
3 data or numeric error.
"""
import argparse
import json
import math
import sys

import numpy as np

from . import dynamics, oracle, regimes, rewardstats, traces
from .errors import DataError, DegenerateError, DomainError, NumericError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3


def _positive(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"must be a positive real: {text!r}")
    return value


def _non_negative(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (math.isfinite(value) and value >= 0):
        raise argparse.ArgumentTypeError(f"must be a non-negative real: {text!r}")
    return value


def _count(minimum):
    def parse(text):
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
        if value < minimum:
            raise argparse.ArgumentTypeError(f"must be >= {minimum}: {text!r}")
        return value
    return parse


def _xi_grid(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected lo:hi:n, got {text!r}")
    lo, hi = _positive(parts[0]), _positive(parts[1])
    n = _count(1)(parts[2])
    if hi < lo:
        raise argparse.ArgumentTypeError(f"hi < lo in {text!r}")
    return np.linspace(lo, hi, n)


def _dump(obj):
    json.dump(obj, sys.stdout, indent=2, allow_nan=True)
    sys.stdout.write("\n")


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def cmd_stats(args):
    K, xi, eps, H = args.k, args.xi, args.eps, args.budget
    try:
        c_sft = rewardstats.c_sft(K, xi)
        sigma_sft = rewardstats.sigma_sft(K, xi, H)
    except DegenerateError:
        c_sft = sigma_sft = None
    _dump({
        "K": K,
        "xi": xi,
        "eps": eps,
        "budget": H,
        "c_rl": rewardstats.c_rl(K, xi),
        "sigma_rl": rewardstats.sigma_rl(K, xi, H).std,
        "psi": rewardstats.psi(K, xi, eps),
        "anti_concentration": rewardstats.anti_concentration(K, xi, eps),
        "c_sft": c_sft,
        "sigma_sft": sigma_sft,
        "expected_return_J": rewardstats.expected_return_J(K, xi, H),
        "regime": regimes.classify(xi).value,
    })
    return EXIT_OK


def cmd_optimal_xi(args):
    res = regimes.optimal_xi(args.k, tol=args.tol)
    _dump({"K": args.k, "xi_star": res.xi_star, "sigma_at_star": res.sigma_at_star,
           "iterations": res.iterations_used})
    return EXIT_OK


def cmd_simulate(args):
    cfg = dynamics.SimConfig(
        K=args.k, xi0=args.xi0, H=args.budget, m=args.iters, delta=args.delta,
        reward_class_log_size=args.log_reward_class, universal_C=args.const_c,
    )
    traj = dynamics.simulate(cfg)
    if traj.terminated_early:
        print(f"note: stopped after {len(traj) - 1} iterations: "
              f"{traj.termination_reason}", file=sys.stderr)
    fh, close = _open_out(args.out)
    try:
        traj.to_csv(fh)
    finally:
        if close:
            fh.close()
    return EXIT_OK


def cmd_oracle(args):
    rng = oracle.RngSpec(args.seed, args.stream)
    if args.dist == "negbin":
        if args.k != int(args.k):
            raise DomainError(f"negbin needs an integer --k, got {args.k}")
        if not args.p < 1:
            raise DomainError(f"negbin needs --p < 1, got {args.p}")
        T = oracle.sample_negbin(int(args.k), args.p, rng, args.samples)
    else:
        T = oracle.sample_gamma(args.k, args.p, rng, args.samples)
    report = oracle.closed_form_report(T, args.k, args.p, args.budget, args.eps)
    _dump({
        "K": args.k,
        "p": args.p,
        "budget": args.budget,
        "xi": args.p * args.budget / args.k,
        "eps": args.eps,
        "dist": args.dist,
        "samples": args.samples,
        "rng": rng.metadata(),
        "ks_distance": oracle.ks_distance(T, oracle.gamma_cdf(args.k, args.p)),
        "statistics": report,
    })
    return EXIT_OK


def cmd_analyze(args):
    if args.input == "-":
        ds = traces.parse_traces(sys.stdin)
    else:
        try:
            ds = traces.load_traces(args.input)
        except OSError as exc:
            print(f"error: cannot read {args.input}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    if ds.n_skipped:
        print(f"note: skipped {ds.n_skipped} malformed lines", file=sys.stderr)
    result = traces.sweep_budget(ds, xi_grid=args.xi_grid, eps=args.eps,
                                 min_correct=args.min_correct)
    print(f"note: {result.n_problems_used} of {ds.n_problems} problems used "
          f"({len(ds)} traces)", file=sys.stderr)
    fh, close = _open_out(args.out)
    try:
        result.to_csv(fh)
    finally:
        if close:
            fh.close()
    return EXIT_OK


def cmd_gen(args):
    ds = traces.generate_synthetic(
        args.k, args.p, args.problems, args.traces, truncation_H=args.truncate,
        rng=oracle.RngSpec(args.seed),
    )
    try:
        fh, close = _open_out(args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        traces.write_traces(ds, fh)
    finally:
        if close:
            fh.close()
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="relbudget",
        description="Relative-budget statistics for RL with verifiable rewards.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="closed-form statistics at (K, xi)")
    p.add_argument("--k", type=_positive, required=True)
    p.add_argument("--xi", type=_positive, required=True)
    p.add_argument("--eps", type=_non_negative, default=0.5)
    p.add_argument("--budget", type=_positive, default=1.0)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("optimal-xi", help="variance-maximizing relative budget")
    p.add_argument("--k", type=_positive, required=True)
    p.add_argument("--tol", type=_positive, default=1e-6)
    p.set_defaults(func=cmd_optimal_xi)

    p = sub.add_parser("simulate", help="idealized online-RL trajectory as CSV")
    p.add_argument("--k", type=_positive, required=True)
    p.add_argument("--xi0", type=_positive, required=True)
    p.add_argument("--budget", type=_positive, required=True)
    p.add_argument("--iters", type=_count(0), required=True)
    p.add_argument("--delta", type=_positive, default=0.05)
    p.add_argument("--log-reward-class", type=_non_negative, default=1.0)
    p.add_argument("--const-c", type=_positive, default=1.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle", help="Monte-Carlo check of the closed forms")
    p.add_argument("--k", type=_positive, required=True)
    p.add_argument("--p", type=_positive, required=True)
    p.add_argument("--budget", type=_positive, required=True)
    p.add_argument("--samples", type=_count(1000), required=True)
    p.add_argument("--dist", choices=("gamma", "negbin"), default="gamma")
    p.add_argument("--eps", type=_non_negative, default=0.5)
    p.add_argument("--seed", type=_count(0), required=True)
    p.add_argument("--stream", type=_count(0), default=0)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("analyze", help="budget sweep over a trace file")
    p.add_argument("--input", required=True, help="trace file, or - for stdin")
    p.add_argument("--xi-grid", type=_xi_grid, default=np.linspace(0.1, 4.0, 40))
    p.add_argument("--eps", type=_non_negative, default=0.5)
    p.add_argument("--min-correct", type=_count(1), default=5)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("gen", help="synthetic gamma trace dataset")
    p.add_argument("--k", type=_positive, required=True)
    p.add_argument("--p", type=_positive, required=True)
    p.add_argument("--problems", type=_count(1), required=True)
    p.add_argument("--traces", type=_count(1), required=True)
    p.add_argument("--seed", type=_count(0), required=True)
    p.add_argument("--truncate", type=_positive, default=None)
    p.add_argument("--out", default="-", help="output path, or - for stdout")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, NumericError, DegenerateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
