"""Command-line interface: ``stlab <subcommand> ...``.

Exit codes: 0 success, 1 domain/precondition errors and bad usage,
2 I/O or file-format errors.
"""

from __future__ import annotations

import argparse
import io
import logging
import math
import sys
import warnings
from dataclasses import dataclass, field

from . import census
from .angles import Interval
from .elliptic import EllipticCurve
from .errors import DomainError, FormatError, StlabError
from .forms import NewformSpec, build_table
from .parallel import default_workers
from .report_io import canonical_json, load_cache, save_cache, write_coefficient_csv
from .tau import hecke_violations, tau_table

log = logging.getLogger("stlab")


@dataclass
class RunConfig:
    threads: int = 1
    constants: dict[str, float] = field(default_factory=lambda: {"c1": 1.0, "c3": 1.0, "c5": 1.0, "c6": 1.0})
    output: str = "text"

    def __post_init__(self):
        if self.threads < 1:
            raise DomainError(f"threads must be >= 1, got {self.threads}")
        for name, value in self.constants.items():
            if not value > 0:
                raise DomainError(f"constant {name} must be > 0, got {value}")
        if self.output not in ("text", "json", "csv"):
            raise DomainError(f"unknown output format {self.output!r}")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _interval(text: str) -> Interval:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("interval must be LO,HI")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"interval endpoints must be decimals: {text!r}") from None
    if lo > hi:
        raise argparse.ArgumentTypeError(f"interval endpoints reversed: {lo} > {hi}")
    try:
        return Interval(lo, hi)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text: str) -> float:
    value = float(text)
    if not value > 0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"must be a positive number: {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--threads", type=int, default=None, help="worker count (default: $STLAB_THREADS or CPU count)")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="output", action="store_const", const="json")
    fmt.add_argument("--csv", dest="output", action="store_const", const="csv")
    fmt.add_argument("--text", dest="output", action="store_const", const="text")
    for name in ("c1", "c3", "c5", "c6"):
        common.add_argument(f"--{name}", type=_positive, default=1.0, help=f"implied constant {name} (default 1)")

    parser = _Parser(prog="stlab", description="Sato-Tate statistics of newform coefficients.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("coeffs", parents=[common], help="generate or ingest a coefficient table")
    p.add_argument("--form", choices=("tau", "ec", "file"), required=True)
    p.add_argument("--weight", type=int, default=None)
    p.add_argument("--level", type=int, default=None)
    for name in ("a1", "a2", "a3", "a4", "a6"):
        p.add_argument(f"--{name}", type=int, default=0)
    p.add_argument("--in", dest="inp", default=None, help="CSV input for --form file")
    p.add_argument("--label", default="")
    p.add_argument("--xmax", type=int, required=True, help="largest prime to include")
    p.add_argument("--out", required=True, help="binary cache to write")

    def cached(name, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("--cache", required=True)
        return sp

    p = cached("sato-tate", "interval count against the Sato-Tate measure")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--interval", type=_interval, required=True, help="LO,HI (write --interval=-0.5,0.5 for negatives)")

    p = cached("atkin-serre", "small-coefficient census")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--variant", choices=("theorem", "proof"), default="theorem")

    p = cached("density", "fraction of p <= X with |a(p)| >= c p^((k-3)/2 - eps)")
    p.add_argument("--upto", type=int, required=True)
    p.add_argument("--eps", type=_positive, required=True)
    p.add_argument("--c", type=_positive, default=1.0)

    p = cached("extremal", "extremal-prime census")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--x", type=int)
    g.add_argument("--upto", type=int)

    p = cached("chebyshev", "Chebyshev sums S_1..S_M with the sum-bound shape")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--nmax", type=int, required=True)

    p = cached("capbound", "counts near cos(theta) = +-1 against the cap bound")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--N", dest="N", type=int, default=None)
    p.add_argument("--strict", action="store_true", help="fail instead of substituting N=3 when automatic N < 3")

    p = cached("discrepancy", "Kolmogorov-Smirnov distance to the Sato-Tate distribution")
    p.add_argument("--upto", type=int, required=True)

    p = cached("verify", "re-check table invariants")
    p.add_argument("--hecke-max", type=int, default=10_000)
    return parser


def _config(args) -> RunConfig:
    threads = args.threads if args.threads is not None else default_workers()
    return RunConfig(threads=threads, constants={c: getattr(args, c) for c in ("c1", "c3", "c5", "c6")},
                     output=args.output or "text")


# -- output -----------------------------------------------------------------


def _emit_report(report: census.CensusReport, cfg: RunConfig, out) -> None:
    if cfg.output == "json":
        out.write(canonical_json(report.to_dict()) + "\n")
        return
    ratio = "null" if report.ratio is None else census.format_number(report.ratio)
    if cfg.output == "csv":
        out.write("form_label,x,mode,observed,bound_shape,ratio\n")
        out.write(f"{report.form_label},{report.x},{report.mode},{report.observed},"
                  f"{census.format_number(report.bound_shape)},{ratio}\n")
        return
    window = f"({report.x}, {2 * report.x}]" if report.mode == census.DYADIC else f"p <= {report.x}"
    out.write(f"form         {report.form_label}\n")
    out.write(f"window       {window}\n")
    out.write(f"observed     {report.observed}\n")
    out.write(f"bound shape  {report.bound_shape:.6g}\n")
    out.write(f"ratio        {ratio if report.ratio is None else f'{report.ratio:.6g}'}\n")
    for k, v in sorted(report.params.items()):
        out.write(f"  {k:<20} {v}\n")


def _emit_rows(doc: dict, rows_key: str, cfg: RunConfig, out) -> None:
    if cfg.output == "json":
        out.write(canonical_json(doc) + "\n")
        return
    rows = doc[rows_key]
    cols = list(rows[0]) if rows else []
    if cfg.output == "csv":
        out.write(",".join(cols) + "\n")
        for row in rows:
            out.write(",".join(census.format_number(row[c]) if row[c] is not None else "" for c in cols) + "\n")
        return
    for k, v in sorted(doc.items()):
        if k != rows_key:
            out.write(f"{k:<14} {v}\n")
    out.write("  ".join(f"{c:>22}" for c in cols) + "\n")
    for row in rows:
        out.write("  ".join(f"{row[c]:>22.12g}" if isinstance(row[c], float) else f"{row[c]!s:>22}" for c in cols) + "\n")


# -- subcommands -------------------------------------------------------------


def cmd_coeffs(args, cfg, out):
    if args.form == "tau":
        spec = NewformSpec.ramanujan_tau(label=args.label)
    elif args.form == "ec":
        if args.level is None:
            raise DomainError("--level is required for --form ec")
        curve = EllipticCurve(args.a1, args.a2, args.a3, args.a4, args.a6)
        spec = NewformSpec.elliptic(curve, args.level, label=args.label)
    else:
        if args.inp is None or args.weight is None or args.level is None:
            raise DomainError("--form file needs --in, --weight and --level")
        spec = NewformSpec.external(args.inp, args.weight, args.level, label=args.label)
    table = build_table(spec, args.xmax, workers=cfg.threads)
    save_cache(table, args.out)
    if cfg.output == "csv":
        write_coefficient_csv(table, out)
        return 0
    doc = {"form_label": table.label, "weight": table.weight, "level": table.level,
           "max_prime": table.max_prime, "entries": len(table), "cache": str(args.out),
           "warnings": list(table.warnings)}
    if cfg.output == "json":
        out.write(canonical_json(doc) + "\n")
    else:
        for k, v in doc.items():
            out.write(f"{k:<12} {v}\n")
    return 0


def cmd_sato_tate(args, cfg, out):
    _emit_report(census.sato_tate_report(load_cache(args.cache), args.x, args.interval, workers=cfg.threads), cfg, out)
    return 0


def cmd_atkin_serre(args, cfg, out):
    if args.x < 16:
        raise DomainError("x must be ≥ 16")
    table = load_cache(args.cache)
    _emit_report(census.atkin_serre_census(table, args.x, args.variant, c1=cfg.constants["c1"],
                                           workers=cfg.threads), cfg, out)
    return 0


def cmd_density(args, cfg, out):
    table = load_cache(args.cache)
    _emit_report(census.atkin_serre_density(table, args.upto, args.eps, args.c, workers=cfg.threads), cfg, out)
    return 0


def cmd_extremal(args, cfg, out):
    table = load_cache(args.cache)
    _emit_report(census.extremal_census(table, args.x, upto=args.upto, c3=cfg.constants["c3"]), cfg, out)
    return 0


def cmd_chebyshev(args, cfg, out):
    if args.nmax < 1:
        raise DomainError("--nmax must be >= 1")
    table = load_cache(args.cache)
    sums = census.chebyshev_sums(table, args.x, args.nmax, workers=cfg.threads)
    window = int(round(sums[0]))
    c5, c6 = cfg.constants["c5"], cfg.constants["c6"]
    limit = census.lemma22_range(args.x, table.weight, table.level)
    rows = []
    with warnings.catch_warnings():
        # out-of-range n is flagged per row instead
        warnings.simplefilter("ignore")
        for n in range(1, args.nmax + 1):
            rows.append({
                "n": n,
                "S_n": sums[n],
                "S_n_over_window": sums[n] / window if window else None,
                "lemma22_bound": census.lemma22_bound(args.x, n, table.weight, table.level, c5, c6),
                "in_stated_range": n <= limit,
            })
    if any(not r["in_stated_range"] for r in rows):
        log.warning("n above %.3g lies outside the range where the sum bound is stated", limit)
    doc = {"form_label": table.label, "window": {"x": args.x, "mode": census.DYADIC}, "window_primes": window,
           "n_range_limit": limit,
           "c5": c5, "c6": c6, "rows": rows}
    _emit_rows(doc, "rows", cfg, out)
    return 0


def cmd_capbound(args, cfg, out):
    table = load_cache(args.cache)
    N = "auto" if args.N is None else args.N
    report = census.interval_cap_rhs(table, args.x, N, strict=args.strict, workers=cfg.threads)
    ok, violations = census.extremal_angle_check(table, args.x, report.params["N"]) \
        if report.params["hypothesis_holds"] == "true" else (None, [])
    report.params["extremal_angle_check"] = "skipped" if ok is None else ("pass" if ok else "fail")
    if violations:
        report.params["extremal_angle_violations"] = ",".join(map(str, violations))
    _emit_report(report, cfg, out)
    return 0


def cmd_discrepancy(args, cfg, out):
    table = load_cache(args.cache)
    i, j = table.upto(args.upto)
    doc = {"form_label": table.label, "window": {"x": args.upto, "mode": census.CUMULATIVE},
           "sample_size": j - i, "statistic": census.discrepancy(table, args.upto)}
    if cfg.output == "json":
        out.write(canonical_json(doc) + "\n")
    elif cfg.output == "csv":
        out.write("form_label,upto,sample_size,statistic\n")
        out.write(f"{doc['form_label']},{args.upto},{doc['sample_size']},{census.format_number(doc['statistic'])}\n")
    else:
        out.write(f"discrepancy of {table.label} over p <= {args.upto} ({j - i} primes): {doc['statistic']:.6g}\n")
    return 0


def verify_table(table, hecke_max: int = 10_000) -> dict[str, dict]:
    """Re-run table invariants; for tau tables also regenerate and Hecke-check."""
    checks = {}
    ps = [p for p, _ in table.entries]
    checks["sorted"] = {"ok": all(a < b for a, b in zip(ps, ps[1:])), "detail": f"{len(ps)} entries"}
    bad = [p for p, a in table.entries if a * a > 4 * p ** (table.weight - 1)]
    checks["deligne"] = {"ok": not bad, "detail": f"violations at {bad[:20]}" if bad else "a^2 <= 4 p^(k-1) everywhere"}
    checks["no_level_primes"] = {"ok": all(table.level % p for p in ps), "detail": f"level {table.level}"}
    if table.spec.source.name == "TAU":
        n = max(2, min(hecke_max, table.max_prime))
        tau = tau_table(n)
        mism = [p for p, a in table.entries if p <= n and tau[p] != a]
        checks["tau_regenerated"] = {"ok": not mism, "detail": f"mismatch at {mism[:20]}" if mism else f"p <= {n}"}
        hv = hecke_violations(tau)
        checks["hecke"] = {"ok": not hv, "detail": "; ".join(hv) if hv else f"n <= {n}"}
    return checks


def cmd_verify(args, cfg, out):
    table = load_cache(args.cache)
    checks = verify_table(table, args.hecke_max)
    ok = all(c["ok"] for c in checks.values())
    doc = {"form_label": table.label, "ok": ok, "checks": checks, "warnings": list(table.warnings)}
    if cfg.output == "json":
        out.write(canonical_json(doc) + "\n")
    else:
        for name, c in checks.items():
            out.write(f"{'PASS' if c['ok'] else 'FAIL'}  {name:<16} {c['detail']}\n")
    return 0 if ok else 1


COMMANDS = {
    "coeffs": cmd_coeffs,
    "sato-tate": cmd_sato_tate,
    "atkin-serre": cmd_atkin_serre,
    "density": cmd_density,
    "extremal": cmd_extremal,
    "chebyshev": cmd_chebyshev,
    "capbound": cmd_capbound,
    "discrepancy": cmd_discrepancy,
    "verify": cmd_verify,
}


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    if not logging.getLogger().handlers:
        logging.basicConfig(stream=sys.stderr, level=logging.WARNING, format="stlab: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _config(args)
        # buffer so a failing command never leaves partial output on stdout
        buf = io.StringIO()
        code = COMMANDS[args.command](args, cfg, buf)
        out.write(buf.getvalue())
        return code
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (FormatError, OSError) as exc:
        print(f"stlab: error: {exc}", file=sys.stderr)
        return 2
    except (StlabError, ValueError) as exc:
        print(f"stlab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
