"""Command-line entry point: ``swiptia {single,sweep-power,sweep-links,convergence}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

from .channel_model import ConfigError, NetworkConfig, load_json, sample_channels
from .ia_alignment import feasible_streams, run_iterative_ia
from .ps_optimizer import OptimizerSettings, optimize_ps
from .sim_harness import SCHEMES, SweepSpec, TrialError, emit_csv, run_sweep, run_trial, write_csv
from .swipt_relay import compute_aggregates

DEFAULT_POWERS = (0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0)
DEFAULT_LINKS = (2, 3, 4, 5, 6)


def _load(args):
    data = load_json(args.config) if args.config else {}
    cfg = NetworkConfig.from_dict(data)
    settings = OptimizerSettings.from_dict(data.get("optimizer", {}))
    return data, cfg, settings


def _schemes(text):
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = set(names) - set(SCHEMES)
    if bad or not names:
        raise argparse.ArgumentTypeError(f"schemes must be a comma list from {', '.join(SCHEMES)}")
    return names


def cmd_single(args):
    _, cfg, settings = _load(args)
    scheme = args.schemes[0] if args.schemes else "proposed"
    report = run_trial(cfg, args.seed, scheme, settings=settings)
    json.dump(report.to_dict(), sys.stdout, indent=2)
    sys.stdout.write("\n")


def _sweep(args, variable, default_values):
    data, cfg, settings = _load(args)
    values = tuple(data.get("sweep", {}).get("values", default_values))
    spec = SweepSpec(
        variable=variable,
        values=values,
        trials=args.trials,
        base=cfg,
        schemes=args.schemes or SCHEMES,
        master_seed=args.seed,
        settings=settings,
    )
    rows = run_sweep(spec)
    if args.out:
        emit_csv(rows, args.out)
    else:
        write_csv(rows, sys.stdout)


def cmd_convergence(args):
    _, cfg, settings = _load(args)
    ch = sample_channels(cfg, args.seed)
    d = feasible_streams(cfg.M, cfg.N, cfg.K)
    if d < 1:
        raise ConfigError(f"no feasible stream count for K={cfg.K}, M={cfg.M}, N={cfg.N}")
    agg = compute_aggregates(cfg, ch, run_iterative_ia(cfg, ch, d))
    _, trace = optimize_ps(cfg, agg, settings)
    header = ["iter", *(f"rho_{i + 1}" for i in range(cfg.K)), "sum_rate"]
    out = open(args.out, "w", encoding="utf-8", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        for row in trace.to_rows(cfg, agg):
            writer.writerow([row[0], *(repr(float(v)) for v in row[1:])])
    finally:
        if out is not sys.stdout:
            out.close()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON network config (optional 'optimizer' and 'sweep' keys)")
    common.add_argument("--seed", type=int, default=0, help="trial seed or sweep master seed")
    common.add_argument("--trials", type=int, default=1000, help="trials per sweep point")
    common.add_argument("--schemes", type=_schemes, default=None, help="comma list of " + ",".join(SCHEMES))
    common.add_argument("--out", help="CSV output path (default: stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="swiptia", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("single", parents=[common], help="one trial, report as JSON").set_defaults(func=cmd_single)
    sub.add_parser("sweep-power", parents=[common], help="mean sum rate vs source power").set_defaults(
        func=lambda a: _sweep(a, "transmit_power", DEFAULT_POWERS)
    )
    sub.add_parser("sweep-links", parents=[common], help="mean sum rate vs number of links").set_defaults(
        func=lambda a: _sweep(a, "link_count", DEFAULT_LINKS)
    )
    sub.add_parser("convergence", parents=[common], help="PS optimizer trace as CSV").set_defaults(
        func=cmd_convergence
    )
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except (ConfigError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TrialError as exc:
        print(f"trial failed: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
