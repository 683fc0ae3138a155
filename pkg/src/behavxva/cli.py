"""Command line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical
non-convergence, 3 golden-tolerance breach under ``table --check``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .chain import captured_mass, truncation_level
from .credit import DomainError, hazard_from_spread
from .engine import ConfigurationError, hedge_side_adjustments, price
from .mc_oracle import SimConfig, simulate_xva
from .quadrature import QuadratureError
from .report import EmitError, emit, price_rows, table_rows, to_csv, PRICE_COLUMNS, TABLE_COLUMNS
from .scenario import ScenarioError, load_scenario
from .tables import TABLE_EPSILON, TABLE_IDS, reproduce_table

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_GOLDEN = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _cmd_compute(args) -> int:
    sc = load_scenario(args.scenario)
    result = price(sc)
    if args.out:
        emit(result, args.format, args.out)
    elif args.format == "json":
        sys.stdout.write(json.dumps({k: v.to_dict() for k, v in result.items()}, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(to_csv(price_rows(result), PRICE_COLUMNS))
    return EXIT_OK


def _print_tolerance_report(result, out) -> None:
    out.write(f"{'client':>6} {'hedge':>6} {'profile':<11} {'T':>3} "
              f"{'engine%':>9} {'publ%':>7} {'dev pp':>7} {'tol':>5}  ok\n")
    for c in result.cells:
        hedge = "-" if c.hedge_bps is None else str(c.hedge_bps)
        v = "n/a" if c.value_pct is None else f"{c.value_pct:9.2f}"
        published = "-" if c.published_pct is None else str(c.published_pct)
        dev = "-" if c.deviation_pp is None else f"{c.deviation_pp:+.2f}"
        tol = "-" if c.tolerance_pp is None else f"{c.tolerance_pp:.1f}"
        ok = {True: "yes", False: "NO", None: "-"}[c.within_tolerance]
        out.write(f"{c.client_bps:>6} {hedge:>6} {c.profile:<11} {c.maturity:>3} "
                  f"{v:>9} {published:>7} {dev:>7} {tol:>5}  {ok}\n")
    out.write(f"max |deviation| {result.max_abs_deviation():.2f}pp, "
              f"{len(result.breaches())} breach(es) of {len(result)} cells\n")


def _cmd_table(args) -> int:
    result = reproduce_table(args.id, quadrature_tol=args.quadrature_tol, epsilon=args.epsilon,
                             n=args.n, workers=args.threads)
    if args.out:
        out = Path(args.out)
        emit(result, args.format, out)
        if args.format != "svg" and not args.no_figure:
            emit(result, "svg", out.with_suffix(".svg"))
    if args.tolerance_report:
        _print_tolerance_report(result, sys.stdout)
    elif not args.out:
        sys.stdout.write(to_csv(table_rows(result), TABLE_COLUMNS))
    if args.check and result.breaches():
        for c in result.breaches():
            sys.stderr.write(f"golden breach {args.id} {c.key}: engine {c.value_pct:.2f}% vs "
                             f"published {c.published_pct}% (tol {c.tolerance_pp}pp)\n")
        return EXIT_GOLDEN
    return EXIT_OK


def _cmd_validate_mc(args) -> int:
    sc = load_scenario(args.scenario)
    cfg = SimConfig(paths=args.paths, seed=args.seed, step=args.step, workers=args.threads)
    engine = hedge_side_adjustments(sc)
    mc = simulate_xva(sc, cfg)
    worst = 0.0
    print(f"{'adj':<6} {'engine':>14} {'mc mean':>14} {'mc se':>11} {'z':>7}")
    for adj, est in mc.items():
        e = engine[adj].behavioural
        z = 0.0 if est.standard_error == 0 else (e - est.mean) / est.standard_error
        worst = max(worst, abs(z))
        print(f"{adj:<6} {e:14.8g} {est.mean:14.8g} {est.standard_error:11.3g} {z:7.2f}")
    print(f"max |z| = {worst:.2f} ({'within' if worst <= args.n_se else 'OUTSIDE'} {args.n_se} SE)")
    return EXIT_OK if worst <= args.n_se else EXIT_NUMERIC


def _cmd_truncation(args) -> int:
    hazard = hazard_from_spread(args.spread / 1e4, args.recovery)
    n = truncation_level(hazard, args.multiplier, args.maturity, args.epsilon)
    mass = captured_mass(hazard, args.multiplier, args.maturity, n)
    print(f"hazard {hazard:.6g}  n {n}  captured {mass:.6f}  missed {1.0 - mass:.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="behavxva", description="Behaviour-aware XVA engine")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("compute", help="price a scenario file")
    c.add_argument("--scenario", required=True, help="scenario JSON path or preset name")
    c.add_argument("--out")
    c.add_argument("--format", choices=("csv", "json"), default="csv")
    c.set_defaults(func=_cmd_compute)

    t = sub.add_parser("table", help="reproduce a published table")
    t.add_argument("id", choices=TABLE_IDS)
    t.add_argument("--tolerance-report", action="store_true")
    t.add_argument("--check", action="store_true", help="exit 3 on any golden-tolerance breach")
    t.add_argument("--out")
    t.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    t.add_argument("--no-figure", action="store_true", help="skip the SVG written next to --out")
    t.add_argument("--epsilon", type=float, default=TABLE_EPSILON)
    t.add_argument("--n", type=int, default=None, help="fixed chain truncation instead of epsilon")
    t.add_argument("--quadrature-tol", type=float, default=1e-8)
    t.add_argument("--threads", type=int, default=None)
    t.set_defaults(func=_cmd_table)

    v = sub.add_parser("validate-mc", help="cross-check the engine by Monte Carlo")
    v.add_argument("--scenario", required=True)
    v.add_argument("--paths", type=int, default=100_000)
    v.add_argument("--seed", type=int, default=20161115)
    v.add_argument("--step", type=float, default=0.01)
    v.add_argument("--n-se", type=float, default=3.0)
    v.add_argument("--threads", type=int, default=None)
    v.set_defaults(func=_cmd_validate_mc)

    r = sub.add_parser("truncation", help="hedge defaults needed for a missed-probability target")
    r.add_argument("--spread", type=float, required=True, help="hedge CDS spread in bps")
    r.add_argument("--maturity", type=float, required=True)
    r.add_argument("--epsilon", type=float, default=0.07)
    r.add_argument("--recovery", type=float, default=0.0)
    r.add_argument("--multiplier", type=float, default=1.0)
    r.set_defaults(func=_cmd_truncation)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except QuadratureError as e:
        print(f"error: {e} (best estimate {e.estimate:.10g})", file=sys.stderr)
        return EXIT_NUMERIC
    except (ScenarioError, ConfigurationError, DomainError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except EmitError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
