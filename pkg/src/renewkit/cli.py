"""Command-line entry point for the verification experiments.

Every run embeds its resolved configuration in the report metadata; seeds are
explicit and no subcommand reads the clock, so reruns are byte-identical.
Exit codes: 0 success, 2 validation error, 3 capacity error, 4 when an
asserted criterion fails (audit-only findings never change the exit code).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import experiments, laws, occupation, renewal, series
from .errors import CapacityExceeded, RenewkitError
from .montecarlo import SimConfig
from .report import ExperimentReport

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CAPACITY = 3
EXIT_CRITERION = 4


def _parse_t_grid(spec: str) -> list[float]:
    try:
        start, stop, count = spec.split(":")
        start, stop, count = float(start), float(stop), int(count)
    except ValueError as exc:
        raise RenewkitError(f"bad t-grid spec {spec!r}, expected start:stop:count") from exc
    if count < 1:
        raise RenewkitError("t-grid count must be >= 1")
    if count == 1:
        return [start]
    step = (stop - start) / (count - 1)
    return [start + i * step for i in range(count)]


def _parse_masses(spec: str) -> list[float]:
    try:
        return [float(x) for x in spec.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise RenewkitError(f"bad masses spec {spec!r}") from exc


def _check_p(p: float) -> float:
    if not (0.0 < p < 1.0):
        raise RenewkitError("p must lie in (0,1)")
    return p


def _write_report(report: ExperimentReport, out: str, fmt: str) -> None:
    if fmt == "json":
        report.write_json(out)
    else:
        report.write_csv_tables(Path(out))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="renewkit",
        description="verification experiments for terminating renewal chains",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p_, seed=True, grid=False):
        p_.add_argument("--out", required=True, help="output path")
        p_.add_argument("--format", choices=("csv", "json"), default="json")
        if seed:
            p_.add_argument("--seed", type=int, default=0)
            p_.add_argument("--shards", type=int, default=1)
        if grid:
            p_.add_argument("--t-grid", default="0.1:0.9:9", help="start:stop:count")

    p_law = sub.add_parser("law", help="emit a punctured law as CSV")
    p_law.add_argument("--beta", type=float)
    p_law.add_argument("--masses", help="comma-separated masses for a custom law")
    p_law.add_argument("--n-max", type=int, default=1000)
    p_law.add_argument("--p", type=float, required=True)
    p_law.add_argument("--out", required=True)

    p_ren = sub.add_parser("renewal", help="renewal sequence with diagnostics")
    p_ren.add_argument("--beta", type=float, required=True)
    p_ren.add_argument("--p", type=float, required=True)
    p_ren.add_argument("--n", type=int, required=True)
    p_ren.add_argument("--n-max", type=int)
    p_ren.add_argument("--engine", choices=("fast", "direct"), default="fast")
    p_ren.add_argument("--out", required=True)

    p_ser = sub.add_parser("series-check", help="tail-product decay regime check")
    p_ser.add_argument("--beta", type=float, required=True)
    p_ser.add_argument("--n", type=int, default=100000)
    common(p_ser, seed=False)

    p_arc = sub.add_parser("arcsine", help="exact arcsine sums, limit, Monte Carlo")
    p_arc.add_argument("--beta", type=float, required=True)
    p_arc.add_argument("--p", type=float, required=True)
    p_arc.add_argument("--n", type=int, required=True)
    p_arc.add_argument("--n-list", help="comma-separated horizons (overrides --n)")
    p_arc.add_argument("--samples", type=int, default=0, help="0 disables Monte Carlo")
    common(p_arc, grid=True)

    p_id = sub.add_parser("identity", help="survivor-set identity audit")
    p_id.add_argument("--p", type=float, required=True)
    p_id.add_argument("--masses", default="0.5,0.5")
    p_id.add_argument("--beta", type=float)
    p_id.add_argument("--n-max", type=int, default=64)
    p_id.add_argument("--n-list", default="2,8,32")
    p_id.add_argument("--samples", type=int, default=0)
    common(p_id, grid=True)

    p_occ = sub.add_parser("occupation", help="occupation-count distribution")
    p_occ.add_argument("--masses")
    p_occ.add_argument("--beta", type=float)
    p_occ.add_argument("--n-max", type=int, default=256)
    p_occ.add_argument("--n", type=int, required=True)
    p_occ.add_argument("--m-max", type=int, required=True)
    p_occ.add_argument("--out", required=True)

    p_dk = sub.add_parser("darling-kac", help="recurrent occupation moments")
    p_dk.add_argument("--beta", type=float, required=True)
    p_dk.add_argument("--n", type=int, required=True)
    p_dk.add_argument("--samples", type=int, default=20000)
    common(p_dk)
    return parser


def _law_from_args(args, n_support: int) -> laws.ReturnLaw:
    if getattr(args, "masses", None):
        return laws.custom_return(_parse_masses(args.masses))
    if getattr(args, "beta", None) is not None:
        return laws.power_law_return(args.beta, n_support)
    raise RenewkitError("provide either --beta or --masses")


def _cmd_law(args) -> int:
    _check_p(args.p)
    law = _law_from_args(args, args.n_max)
    tl = laws.puncture(law, args.p)
    laws.write_law_csv(tl, args.out)
    return EXIT_OK


def _cmd_renewal(args) -> int:
    _check_p(args.p)
    n_max = args.n_max if args.n_max else args.n
    if n_max < args.n:
        raise RenewkitError("--n-max must cover --n")
    law = laws.power_law_return(args.beta, n_max)
    tl = laws.puncture(law, args.p)
    engine = renewal.renewal_fast if args.engine == "fast" else renewal.renewal_direct
    rs = engine(tl, args.n)
    renewal.write_renewal_csv(rs, args.out)
    return EXIT_OK


def _cmd_series_check(args) -> int:
    a = series.power_tail_series(args.beta, args.n)
    rep = series.regime_check(a, a, args.beta)
    report = ExperimentReport(
        meta={
            "experiment": "series_regime_check",
            "beta": args.beta,
            "n": args.n,
            "window": list(rep.window),
        },
        tables={
            "regime": [
                {
                    "beta": rep.beta,
                    "fitted_exponent": rep.fitted_exponent,
                    "predicted_exponent": rep.predicted_exponent,
                    "regime": rep.regime,
                    "matches_prediction": rep.matches_prediction,
                    "log_ratio_spread": rep.log_ratio_spread,
                }
            ]
        },
    )
    report.add_audit("regime_fit", "decay regime reported; no tolerance asserted here")
    _write_report(report, args.out, args.format)
    return EXIT_OK


def _cmd_arcsine(args) -> int:
    _check_p(args.p)
    n_list = (
        [int(x) for x in args.n_list.split(",")] if args.n_list else [args.n]
    )
    t_grid = _parse_t_grid(args.t_grid)
    cfg = None
    if args.samples > 0:
        cfg = SimConfig(seed=args.seed, shards=args.shards, samples=args.samples)
    report = experiments.arcsine_convergence_report(args.beta, args.p, n_list, t_grid, cfg)
    _write_report(report, args.out, args.format)
    return EXIT_OK if report.passed() else EXIT_CRITERION


def _cmd_identity(args) -> int:
    _check_p(args.p)
    law = _law_from_args(args, args.n_max)
    n_list = [int(x) for x in args.n_list.split(",")]
    t_grid = _parse_t_grid(args.t_grid)
    cfg = None
    if args.samples > 0:
        cfg = SimConfig(seed=args.seed, shards=args.shards, samples=args.samples)
    report = experiments.occupation_audit(law, [args.p], n_list, t_grid, cfg)
    _write_report(report, args.out, args.format)
    return EXIT_OK if report.passed() else EXIT_CRITERION


def _cmd_occupation(args) -> int:
    law = _law_from_args(args, args.n_max)
    table = occupation.sn_distribution(law, args.n, args.m_max)
    with open(args.out, "w") as fh:
        fh.write("m,F_m\n")
        for m, f in enumerate(table.F):
            fh.write(f"{m},{f:.17g}\n")
    return EXIT_OK


def _cmd_darling_kac(args) -> int:
    cfg = SimConfig(seed=args.seed, shards=args.shards, samples=args.samples)
    report = experiments.darling_kac_report(args.beta, args.n, cfg)
    _write_report(report, args.out, args.format)
    return EXIT_OK if report.passed() else EXIT_CRITERION


_COMMANDS = {
    "law": _cmd_law,
    "renewal": _cmd_renewal,
    "series-check": _cmd_series_check,
    "arcsine": _cmd_arcsine,
    "identity": _cmd_identity,
    "occupation": _cmd_occupation,
    "darling-kac": _cmd_darling_kac,
}


def run(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except CapacityExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (RenewkitError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
