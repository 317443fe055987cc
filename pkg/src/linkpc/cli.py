"""Command line entry point: ``linkpc run|compare|sweep``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from linkpc import harness
from linkpc.baselines import STRATEGIES
from linkpc.config import ConfigError, parse_config, parse_seeds, parse_values

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="linkpc", description="Passive clustering sensor network simulator")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("config", help="scenario YAML file")
        sp.add_argument("--out", default="out", help="output directory (default: out)")
        sp.add_argument("--format", default="both", choices=harness.FORMATS)

    r = sub.add_parser("run", help="single run")
    common(r)

    c = sub.add_parser("compare", help="paired strategy comparison over seeds")
    common(c)
    c.add_argument("--strategies", required=True, help=f"comma list from {','.join(STRATEGIES)}")
    c.add_argument("--seeds", required=True, help="range like 1..20 or a comma list")
    c.add_argument("--jobs", type=int, default=1, help="parallel worker processes")

    s = sub.add_parser("sweep", help="one run per parameter value")
    common(s)
    s.add_argument("--param", required=True)
    s.add_argument("--values", required=True, help="comma-separated values")
    return p


def _warn(messages):
    for m in messages:
        print(f"warning: {m}", file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        cfg = parse_config(args.config)
        if args.command == "run":
            art = harness.run(cfg, out, args.format)
            _warn(art.warnings)
            print(json.dumps({k: art.summary[k] for k in
                              ("network_lifetime_s", "energy_per_delivered_report_j", "final_delivery_ratio")}))
        elif args.command == "compare":
            strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
            try:
                seeds = parse_seeds(args.seeds)
            except ValueError as exc:
                raise ConfigError("--seeds", str(exc)) from None
            result = harness.compare(cfg, strategies, seeds, out, args.format, jobs=args.jobs)
            sys.stdout.write(result.to_csv())
        else:
            result = harness.sweep(cfg, args.param, parse_values(args.values), out, args.format)
            for art in result:
                _warn(art.warnings)
            print(f"{len(result)} runs written to {out}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
