"""Command-line front end.

    marketeq solve    --mode MODE --input inst.json (--epsilon E | --sigma S)
    marketeq verify   --input inst.json --candidate cand.json --sigma S --lambda L
    marketeq oracle   --input inst.json --grid-step H
    marketeq fixtures --output-dir DIR

Exit codes: 0 success or pass, 2 nothing found or verification failed,
3 bad input, 4 numerical trouble inside the LP solver.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from .arrow_debreu import solve_ad_fixed_agents, solve_ad_fixed_items
from .errors import (DimensionMismatch, InvariantError, NotFound, SchemaError,
                     UnboundedDemand)
from .fisher import solve_fixed_agents, solve_fixed_items
from .io import (candidate_to_dict, instance_to_dict, parse_candidate,
                 parse_instance)
from .lp import MalformedProgram, NumericalStall
from .matching import (solve_hz_thrifty_fixed_agents,
                       solve_matching_fixed_agents,
                       solve_matching_fixed_items)
from .model import AdMarket, FisherMarket, MatchingMarket
from .verify import (nonconvexity_fixture, oracle_grid_search, verify_ad,
                     verify_fisher, verify_matching)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3, 4

log = logging.getLogger("marketeq")

# mode -> (market type, solver, accuracy flag)
MODES = {
    "fixed-items": (FisherMarket, solve_fixed_items, "epsilon"),
    "fixed-agents": (FisherMarket, solve_fixed_agents, "sigma"),
    "matching-fixed-items": (MatchingMarket, solve_matching_fixed_items,
                             "epsilon"),
    "matching-fixed-agents": (MatchingMarket, solve_matching_fixed_agents,
                              "sigma"),
    "hz-thrifty": (MatchingMarket, solve_hz_thrifty_fixed_agents, "sigma"),
    "ad-fixed-agents": (AdMarket, solve_ad_fixed_agents, "sigma"),
    "ad-fixed-items": (AdMarket, solve_ad_fixed_items, "sigma"),
}


class InputError(Exception):
    pass


def _setup_logging():
    level = os.environ.get("MARKETEQ_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO,
              "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.ERROR),
                        format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)


def _read(path):
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _write(path, doc):
    text = json.dumps(doc, indent=2) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def verify_any(market, cand, sigma, lam, thrifty):
    if isinstance(market, FisherMarket):
        return verify_fisher(market, cand, sigma, lam, thrifty)
    if isinstance(market, MatchingMarket):
        return verify_matching(market, cand, sigma, lam, thrifty)
    return verify_ad(market, cand, sigma, lam)


def _accuracy(args, flag):
    value = getattr(args, flag)
    if value is None:
        raise InputError(f"--mode {args.mode} needs --{flag}")
    if not 0 < value < 1:
        raise InputError(f"--{flag} must lie in (0, 1), got {value}")
    return value


def cmd_solve(args):
    kind, solver, flag = MODES[args.mode]
    accuracy = _accuracy(args, flag)
    market = parse_instance(_read(args.input),
                            require_unit_coefficients=args.mode
                            == "ad-fixed-items")
    if not isinstance(market, kind):
        raise InputError(f"--mode {args.mode} does not accept a "
                         f"{type(market).__name__}")
    start = time.perf_counter()
    cand = solver(market, accuracy, threads=args.threads)
    log.info("solved in %.3f s", time.perf_counter() - start)
    report = verify_any(market, cand, cand.sigma, cand.lam, cand.thrifty)
    _write(args.output, candidate_to_dict(cand))
    print(report.summary(), file=sys.stderr if args.output in (None, "-")
          else sys.stdout)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_verify(args):
    market = parse_instance(_read(args.input))
    cand = parse_candidate(_read(args.candidate))
    sigma = cand.sigma if args.sigma is None else args.sigma
    lam = cand.lam if args.lam is None else args.lam
    thrifty = args.thrifty or (args.sigma is None and cand.thrifty)
    report = verify_any(market, cand, sigma, lam, thrifty)
    if args.json:
        _write(None, report.to_dict())
    else:
        print(report.summary())
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_oracle(args):
    if not args.grid_step > 0:
        raise InputError("--grid-step must be positive")
    market = parse_instance(_read(args.input))
    if not isinstance(market, FisherMarket):
        raise InputError("oracle only handles Fisher markets")
    res = oracle_grid_search(market, args.grid_step, threads=args.threads)
    _write(args.output, {"p": res.p.tolist(), "residual": res.residual,
                         "x": res.x.tolist(), "points": res.points})
    return EXIT_OK


def cmd_fixtures(args):
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    fx = nonconvexity_fixture()
    _write(out / "table1.json", instance_to_dict(fx.market))
    for k, cand in enumerate(fx.candidates, start=1):
        _write(out / f"price{k}.json", candidate_to_dict(cand))
    _write(out / "midpoint.json",
           {"x": fx.midpoint_allocation.tolist(),
            "p": fx.midpoint_price.tolist(),
            "reject_threshold": fx.reject_threshold})
    print(f"wrote fixtures to {out}")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(
        prog="marketeq",
        description="Approximate market equilibria with a built-in LP solver.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="compute an approximate equilibrium")
    sp.add_argument("--mode", required=True, choices=sorted(MODES))
    sp.add_argument("--input", required=True)
    sp.add_argument("--epsilon", type=float)
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--threads", type=int)
    sp.add_argument("--output", help="candidate file (default: stdout)")
    sp.set_defaults(func=cmd_solve)

    vp = sub.add_parser("verify", help="check a candidate independently")
    vp.add_argument("--input", required=True)
    vp.add_argument("--candidate", required=True)
    vp.add_argument("--sigma", type=float,
                    help="defaults to the candidate's advertised value")
    vp.add_argument("--lambda", dest="lam", type=float)
    vp.add_argument("--thrifty", action="store_true")
    vp.add_argument("--json", action="store_true",
                    help="print the report as JSON")
    vp.set_defaults(func=cmd_verify)

    op = sub.add_parser("oracle", help="brute-force residual minimum")
    op.add_argument("--input", required=True)
    op.add_argument("--grid-step", type=float, default=0.01)
    op.add_argument("--threads", type=int)
    op.add_argument("--output")
    op.set_defaults(func=cmd_oracle)

    fp = sub.add_parser("fixtures", help="write the non-convexity example")
    fp.add_argument("--output-dir", default=".")
    fp.set_defaults(func=cmd_fixtures)
    return ap


def run(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    if getattr(args, "threads", None) is not None and args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (InputError, SchemaError, InvariantError,
            DimensionMismatch) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NotFound, UnboundedDemand) as exc:
        print(f"not found: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (NumericalStall, MalformedProgram) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
