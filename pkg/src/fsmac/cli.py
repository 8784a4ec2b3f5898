"""Command line front end.

Subcommands: validate, sumrate, region, simulate, verify-converse.  Every
report is JSON with an embedded run manifest; the payload goes to --out when
given (summary line on stdout) and to stdout otherwise (summary line on
stderr), so stdout is machine-parseable either way.

Exit codes: 0 success, 1 validation or guard rejection, 2 unreadable or
malformed input, 3 internal invariant breach (including a converse
factorization deviation above tolerance).
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import os
import sys
import time

from . import __version__
from .converse import random_encoders, verify_factorization
from .errors import GuardError, InternalInvariantError, SpecFormatError, ValidationError
from .mcsim import DECODERS, SimConfig, estimate_error
from .model import DEFAULT_STRATEGY_CAP, induced_strategy_channel, load_spec
from .optimize import (
    OptimizerConfig,
    grid_oracle_sum_rate,
    inner_bound_region,
    maximize_sum_rate,
)
from .rates import load_policy
from .rng import ROLE_ENCODER, stream

# Exit 3 when a random code's letter law strays further than this from the
# factorized form; anything above it means the reduction itself is broken.
CONVERSE_TOL = 1e-9


def _canonical(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _manifest(command: str, spec_path: str, options: dict, seed: int,
              started: float, started_utc: str) -> dict:
    # Thread count is deliberately absent from the options echo: results are
    # merged by work-item index, so payload bytes must not depend on it.
    return {
        "command": command,
        "spec_path": spec_path,
        "options": options,
        "seed": seed,
        "version": __version__,
        "timing": {
            "started_utc": started_utc,
            "duration_s": round(time.monotonic() - started, 6),
        },
    }


class _Clock:
    """Captures the start instant once so the manifest can report both the
    wall-clock timestamp and the elapsed duration."""

    def __init__(self):
        self.started = time.monotonic()
        self.started_utc = datetime.datetime.now(datetime.timezone.utc).strftime(
            "%Y-%m-%dT%H:%M:%SZ"
        )

    def manifest(self, command: str, spec_path: str, options: dict, seed: int) -> dict:
        return _manifest(command, spec_path, options, seed,
                         self.started, self.started_utc)


def _emit(payload: dict, out: str | None, summary: str) -> None:
    text = _canonical(payload)
    if out is None:
        sys.stdout.write(text)
        print(summary, file=sys.stderr)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(summary)


def _resolve_threads(args) -> int:
    if getattr(args, "threads", None) is not None:
        return args.threads
    return int(os.environ.get("FSMAC_THREADS", "1"))


def cmd_validate(args) -> int:
    clock = _Clock()
    spec = load_spec(args.spec, strategy_cap=args.strategy_cap)
    count_a = spec.size_xa ** spec.size_sa
    count_b = spec.size_xb ** spec.size_sb
    payload = {
        "ok": True,
        "alphabets": {
            "xa": spec.size_xa, "xb": spec.size_xb, "s": spec.size_s,
            "sa": spec.size_sa, "sb": spec.size_sb, "y": spec.size_y,
        },
        "strategies": {"a": count_a, "b": count_b, "pairs": count_a * count_b},
        "manifest": clock.manifest(
            "validate", args.spec,
            {"spec": args.spec, "strategy_cap": args.strategy_cap},
            seed=0,
        ),
    }
    _emit(payload, args.out,
          f"{args.spec}: ok ({count_a} x {count_b} strategy pairs)")
    return 0


def cmd_sumrate(args) -> int:
    clock = _Clock()
    threads = _resolve_threads(args)
    spec = load_spec(args.spec, strategy_cap=args.strategy_cap)
    chan = induced_strategy_channel(spec, strategy_cap=args.strategy_cap)
    cfg = OptimizerConfig(restarts=args.restarts, seed=args.seed)
    result = maximize_sum_rate(spec, chan, cfg, threads=threads)
    payload = {
        "value": float(result.value),
        "policy": result.policy.to_dict(),
        "restarts_used": cfg.restarts,
        "converged": bool(result.converged),
        "manifest": clock.manifest(
            "sumrate", args.spec,
            {
                "spec": args.spec, "strategy_cap": args.strategy_cap,
                "restarts": args.restarts, "resolution": args.resolution,
                "out": args.out,
            },
            seed=args.seed,
        ),
    }
    if args.resolution is not None:
        payload["grid_oracle"] = {
            "resolution": args.resolution,
            "value": float(grid_oracle_sum_rate(spec, chan, args.resolution)),
        }
    _emit(payload, args.out, f"C_sum = {result.value:.6f} bits")
    return 0


def cmd_region(args) -> int:
    clock = _Clock()
    threads = _resolve_threads(args)
    spec = load_spec(args.spec, strategy_cap=args.strategy_cap)
    chan = induced_strategy_channel(spec, strategy_cap=args.strategy_cap)
    cfg = OptimizerConfig(restarts=args.restarts, seed=args.seed)
    region = inner_bound_region(spec, chan, cfg,
                                directions=args.directions, threads=threads)
    outer = maximize_sum_rate(spec, chan, cfg, threads=threads)

    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["ra", "rb"])
        for ra, rb in region.vertices:
            writer.writerow([format(float(ra), ".17g"), format(float(rb), ".17g")])

    if args.csv is not None:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["direction_a", "direction_b",
                             "bound_a", "bound_b", "bound_sum"])
            for sup in region.supports:
                pent = sup.pentagon
                writer.writerow([
                    format(float(sup.direction[0]), ".17g"),
                    format(float(sup.direction[1]), ".17g"),
                    format(float(pent.bound_a), ".17g"),
                    format(float(pent.bound_b), ".17g"),
                    format(float(pent.bound_sum), ".17g"),
                ])

    sidecar = args.out + ".json"
    payload = {
        "outer_sum_value": float(outer.value),
        "vertices": [[float(ra), float(rb)] for ra, rb in region.vertices],
        "manifest": clock.manifest(
            "region", args.spec,
            {
                "spec": args.spec, "strategy_cap": args.strategy_cap,
                "restarts": args.restarts, "directions": args.directions,
                "out": args.out, "csv": args.csv,
            },
            seed=args.seed,
        ),
    }
    with open(sidecar, "w", encoding="utf-8") as fh:
        fh.write(_canonical(payload))
    print(f"region: {len(region.vertices)} hull vertices, "
          f"outer sum {outer.value:.6f} bits")
    return 0


def _report_dict(rep) -> dict:
    cfg = rep.config
    return {
        "blocklength": cfg.blocklength,
        "rate_a": cfg.rate_a,
        "rate_b": cfg.rate_b,
        "epsilon": cfg.epsilon,
        "decoder": cfg.decoder,
        "messages_a": cfg.messages_a,
        "messages_b": cfg.messages_b,
        "trials": rep.trials,
        "errors": rep.errors,
        "error_rate": float(rep.error_rate),
        "wilson_low": float(rep.wilson_low),
        "wilson_high": float(rep.wilson_high),
        "no_typical_count": rep.no_typical_count,
        "decoder_ambiguous_count": rep.decoder_ambiguous_count,
        "wrong_decode_count": rep.wrong_decode_count,
    }


def cmd_simulate(args) -> int:
    clock = _Clock()
    threads = _resolve_threads(args)
    spec = load_spec(args.spec, strategy_cap=args.strategy_cap)
    chan = induced_strategy_channel(spec, strategy_cap=args.strategy_cap)
    if args.policy is not None:
        policy = load_policy(args.policy)
    else:
        # No policy file: simulate the optimized sum-rate policy.
        opt = maximize_sum_rate(spec, chan, OptimizerConfig(seed=args.seed),
                                threads=threads)
        policy = opt.policy

    reports = []
    for n in args.n:
        cfg = SimConfig(blocklength=n, rate_a=args.ra, rate_b=args.rb,
                        epsilon=args.eps, trials=args.trials,
                        seed=args.seed, decoder=args.decoder)
        reports.append(estimate_error(spec, chan, policy, cfg, threads=threads))

    if args.csv is not None:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["n", "messages_a", "messages_b", "trials",
                             "errors", "error_rate", "wilson_low", "wilson_high"])
            for rep in reports:
                writer.writerow([
                    rep.config.blocklength,
                    rep.config.messages_a, rep.config.messages_b,
                    rep.trials, rep.errors,
                    format(float(rep.error_rate), ".17g"),
                    format(float(rep.wilson_low), ".17g"),
                    format(float(rep.wilson_high), ".17g"),
                ])

    payload = {
        "reports": [_report_dict(rep) for rep in reports],
        "manifest": clock.manifest(
            "simulate", args.spec,
            {
                "spec": args.spec, "strategy_cap": args.strategy_cap,
                "policy": args.policy, "n": list(args.n),
                "ra": args.ra, "rb": args.rb, "eps": args.eps,
                "trials": args.trials, "decoder": args.decoder,
                "out": args.out, "csv": args.csv,
            },
            seed=args.seed,
        ),
    }
    summary = "; ".join(
        f"P_err(n={rep.config.blocklength}) = {rep.error_rate:.4f} "
        f"[{rep.wilson_low:.4f}, {rep.wilson_high:.4f}]"
        for rep in reports
    )
    _emit(payload, args.out, summary)
    return 0


def cmd_verify_converse(args) -> int:
    clock = _Clock()
    spec = load_spec(args.spec, strategy_cap=args.strategy_cap)
    chan = induced_strategy_channel(spec, strategy_cap=args.strategy_cap)
    worst = 0.0
    worst_t, worst_sigma = 1, ""
    for trial in range(args.trials):
        maps = random_encoders(spec, args.n, 2, 2,
                               stream(args.seed, trial, ROLE_ENCODER))
        audit = verify_factorization(spec, maps, chan)
        if audit.max_deviation > worst:
            worst = audit.max_deviation
            worst_t, worst_sigma = audit.worst_t, audit.worst_sigma
    payload = {
        "max_deviation": worst,
        "trials": args.trials,
        "worst_case": {"t": worst_t, "sigma": worst_sigma},
        "manifest": clock.manifest(
            "verify-converse", args.spec,
            {
                "spec": args.spec, "strategy_cap": args.strategy_cap,
                "n": args.n, "trials": args.trials, "out": args.out,
            },
            seed=args.seed,
        ),
    }
    breached = worst > CONVERSE_TOL
    summary = (f"converse factorization: max deviation {worst:.3e} "
               f"over {args.trials} codes (n={args.n})")
    if breached:
        summary += f", EXCEEDS {CONVERSE_TOL:g}"
    _emit(payload, args.out, summary)
    return 3 if breached else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fsmac",
        description="Capacity bounds and coding experiments for "
                    "state-dependent MACs with noisy causal state feedback.",
    )
    parser.add_argument("--version", action="version",
                        version=f"fsmac {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=False):
        p.add_argument("--spec", required=True, help="model spec JSON file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--strategy-cap", type=int, default=DEFAULT_STRATEGY_CAP,
                       help="refuse specs with more per-sender strategies")
        p.add_argument("--out", required=out_required,
                       help="write the JSON report here instead of stdout")

    p = sub.add_parser("validate", help="check a spec file and report sizes")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sumrate", help="maximize the strategy sum rate")
    common(p)
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: FSMAC_THREADS or 1)")
    p.add_argument("--resolution", type=int, default=None,
                   help="also run the grid oracle at this resolution")
    p.set_defaults(func=cmd_sumrate)

    p = sub.add_parser("region", help="trace the achievable rate region hull")
    common(p, out_required=True)
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--directions", type=int, default=33)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--csv", default=None,
                   help="also write the per-direction pentagon table here")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("simulate", help="Monte Carlo block-coding error rates")
    common(p)
    p.add_argument("--policy", default=None,
                   help="policy JSON file (default: optimized sum-rate policy)")
    p.add_argument("--n", type=int, nargs="+", required=True,
                   help="blocklengths to sweep")
    p.add_argument("--ra", type=float, required=True, help="rate for sender a")
    p.add_argument("--rb", type=float, required=True, help="rate for sender b")
    p.add_argument("--eps", type=float, default=0.1,
                   help="typicality tolerance")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--decoder", choices=DECODERS, default="typicality")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--csv", default=None, help="write the per-n sweep table here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify-converse",
                       help="audit the single-letter factorization on random codes")
    common(p)
    p.add_argument("--n", type=int, default=2, help="blocklength")
    p.add_argument("--trials", type=int, default=50,
                   help="number of random encoder pairs")
    p.set_defaults(func=cmd_verify_converse)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpecFormatError, OSError, json.JSONDecodeError) as exc:
        print(f"fsmac: error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, GuardError, ValueError) as exc:
        print(f"fsmac: error: {exc}", file=sys.stderr)
        return 1
    except InternalInvariantError as exc:
        print(f"fsmac: internal invariant violated: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
