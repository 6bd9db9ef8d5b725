# main.py

import argparse
import json
import logging
import os
import sys

from agent_orchestrator import STATUS_ERROR, ScenarioOrchestrator
from config import ConfigError, load_config, with_certify_points
from scenario_agent import SCENARIOS

# extra certification points quoted alongside the default one
QUOTED_CERTIFY_POINTS = [(1.0 / 15.0, 0.8), (1.0 / 10.0, 0.8)]


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--energy", type=float, help="Kinetic energy E of each particle (mass 1).")
    common.add_argument("--direction", help="Boost direction x,y,z; normalized.")
    common.add_argument("--xi", type=float, action="append", help="Rapidity; repeat for several.")
    common.add_argument("--x-grid", help="start:stop:step, inclusive.")
    common.add_argument("--p", type=float, help="Mixing weight of the activation state.")
    common.add_argument("--interpretation", help="literal-renormalized, sqrt-amplitudes or bell-mixture.")
    common.add_argument("--k-terms", type=int, help="Product terms in a separability certificate.")
    common.add_argument("--restarts", type=int, help="Solver restarts.")
    common.add_argument("--tol", type=float, help="Certificate Hilbert-Schmidt tolerance.")
    common.add_argument("--seed", type=int, help="Master random seed.")
    common.add_argument("--samples", type=int, help="Simplex scan sample count.")
    common.add_argument("--workers", type=int, help="Worker threads.")
    common.add_argument("--fixture", help="Ensemble fixture for verify-appendix.")
    common.add_argument("--point", action="append", metavar="X,XI", help="Certification point; repeat for several.")
    common.add_argument("--quoted-points", action="store_true", help="Certify at x=1/15 and x=1/10 (xi=0.8).")
    common.add_argument("--out", help="Output directory.")
    common.add_argument("--config", help="Key-value configuration file.")
    common.add_argument("--log-level", default=os.getenv("LOG_LEVEL", "INFO"))

    parser = argparse.ArgumentParser(description="Bound entanglement under Lorentz boosts: scenario runner")
    sub = parser.add_subparsers(dest="scenario", required=True)
    for name in list(SCENARIOS) + ["all"]:
        sub.add_parser(name, parents=[common])
    return parser


def _overrides(args):
    overrides = {
        "energy": args.energy,
        "direction": args.direction,
        "xi": args.xi,
        "x_grid": args.x_grid,
        "p": args.p,
        "interpretation": args.interpretation,
        "k_terms": args.k_terms,
        "restarts": args.restarts,
        "tol": args.tol,
        "seed": args.seed,
        "samples": args.samples,
        "workers": args.workers,
        "fixture": args.fixture,
        "out": args.out,
        "log_level": args.log_level,
    }
    return {k: v for k, v in overrides.items() if v is not None}


def _points(args):
    points = list(QUOTED_CERTIFY_POINTS) if args.quoted_points else []
    for raw in args.point or []:
        try:
            x, xi = (float(v) for v in raw.split(","))
        except ValueError:
            raise ConfigError(f"--point must look like X,XI, got {raw!r}")
        points.append((x, xi))
    return points


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        cfg = load_config(args.config, _overrides(args))
        points = _points(args)
        if points:
            cfg = with_certify_points(cfg, points)
    except (ConfigError, ValueError) as e:
        print(json.dumps({"error": str(e), "status": STATUS_ERROR}))
        return STATUS_ERROR

    orchestrator = ScenarioOrchestrator(cfg)
    result = orchestrator.route_scenario(args.scenario)

    print("\n=== Scenario Result ===")
    print(json.dumps(result, indent=2, default=str))
    return result["status"]


if __name__ == "__main__":
    sys.exit(main())
