"""Command-line front end: bounds, scan, beta, resonance, and selftest.

All numeric output is decimal strings tagged with the working precision, so
reports are byte-stable across runs with identical configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass

from .curve import ExponentVector, parse_exponents
from .diophantine import scan
from .errors import (
    BudgetExceeded,
    IndependenceViolation,
    PrecisionExhausted,
    TowerOverflow,
)
from .lower_bounds import compute_bound_report, resonance_lower
from .numerics import PrecisionContext
from .polynomials import default_torus_samples
from .upper_bounds import BetaTable, beta_table

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_DEGENERATE = 2


@dataclass
class RunConfig:
    """Parsed CLI options shared by the subcommands."""

    command: str
    x_text: str | None = None
    d: int | None = None
    n_lo: int | None = None
    n_hi: int | None = None
    Q: int = 100
    cone: str = "all"
    precision: int = 256
    samples: int = 4096
    seed: int = 2718
    out: str | None = None
    fmt: str = "json"
    quick: bool = False
    force_budget: bool = False
    q_vector: tuple | None = None

    def context(self) -> PrecisionContext:
        if self.precision < 64:
            raise ValueError("precision must be at least 64 bits")
        return PrecisionContext(
            mantissa_bits=self.precision,
            circle_samples=self.samples,
            torus_samples=self.samples,
            seed=self.seed,
        )

    def exponents(self) -> ExponentVector:
        if not self.x_text:
            raise ValueError("--x is required for this command")
        x = parse_exponents(self.x_text, self.precision)
        if self.d is not None and x.d != self.d:
            raise ValueError(f"--d {self.d} does not match {x.d} components in --x")
        return x


def _parse_n_range(text: str) -> tuple[int, int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return int(lo), int(hi)
    v = int(text)
    return v, v


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def cmd_bounds(cfg: RunConfig) -> int:
    """Emit one BoundReport per n in the requested range, ascending."""
    x = cfg.exponents()
    ctx = cfg.context()
    samples = default_torus_samples(x.d, ctx)
    reports = []
    for n in range(cfg.n_lo, cfg.n_hi + 1):
        reports.append(
            compute_bound_report(n, x, ctx, samples=samples, force_budget=cfg.force_budget)
        )
    if cfg.fmt == "json":
        lines = [json.dumps(r.to_json_dict(), sort_keys=True) for r in reports]
        _emit(cfg, "\n".join(lines) + "\n")
    else:
        from .lower_bounds import BoundReport

        _emit(cfg, _csv_text(list(BoundReport.CSV_FIELDS), [r.csv_row() for r in reports]))
    return EXIT_OK


def cmd_scan(cfg: RunConfig) -> int:
    x = cfg.exponents()
    ctx = cfg.context()
    profile = scan(x, cfg.Q, cfg.cone, ctx)
    header = profile.csv_header(x.d)
    _emit(cfg, _csv_text(header, profile.csv_rows()))
    return EXIT_OK


def cmd_beta(cfg: RunConfig) -> int:
    x = cfg.exponents()
    ctx = cfg.context()
    table = beta_table(cfg.n_lo, x, ctx, force_budget=cfg.force_budget)
    _emit(cfg, _csv_text(BetaTable.csv_header(x.d), table.csv_rows()))
    return EXIT_OK


def cmd_resonance(cfg: RunConfig) -> int:
    x = cfg.exponents()
    ctx = cfg.context()
    if not cfg.q_vector:
        raise ValueError("--q is required for the resonance command")
    n, bound = resonance_lower(cfg.q_vector, x, ctx)
    from .diophantine import _nearest_int_exact

    p, dist = _nearest_int_exact(x.dot(cfg.q_vector))
    doc = {
        "x": x.descriptor,
        "q": list(cfg.q_vector),
        "p": p,
        "dist": {"value": str(ctx.field.make(dist).hi), "bits": cfg.precision},
        "n": n,
        "lower_bound": {"value": str(bound), "bits": cfg.precision},
    }
    _emit(cfg, json.dumps(doc, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_selftest(cfg: RunConfig) -> int:
    from .selftest import run_selftest

    results = run_selftest(cfg.context(), quick=cfg.quick)
    failures = [r.name for r in results if not r.passed]
    if cfg.fmt == "csv":
        rows = [
            [r.name, "1" if r.passed else "0", r.detail, f"{r.seconds:.2f}"]
            for r in results
        ]
        _emit(cfg, _csv_text(["check", "passed", "detail", "seconds"], rows))
    else:
        lines = []
        for r in results:
            status = "PASS" if r.passed else "FAIL"
            lines.append(f"[{status}] {r.name}: {r.detail} ({r.seconds:.2f}s)")
        lines.append(f"{len(results) - len(failures)}/{len(results)} checks passed")
        _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK if not failures else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bwbounds",
        description="Certified bounds for polydisk-vs-curve extremal constants "
        "of exponential curves.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_x=True, with_n=False):
        if with_x:
            p.add_argument("--x", required=True, help="exponents: fixtures, rationals, or decimals, comma-separated")
            p.add_argument("--d", type=int, default=None, help="expected dimension (validated)")
        if with_n:
            p.add_argument("--n", required=True, help="degree or inclusive range a..b")
        p.add_argument("--precision", type=int, default=256, help="mantissa bits (default 256)")
        p.add_argument("--samples", type=int, default=4096, help="sample count for norms")
        p.add_argument("--seed", type=int, default=2718, help="seed for pseudo-random samples")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
        p.add_argument("--force-budget", action="store_true", help="override the table size budget")

    p = sub.add_parser("bounds", help="lower and upper bounds for a degree range")
    common(p, with_n=True)

    p = sub.add_parser("scan", help="per-norm minima of <q.x> up to a depth")
    common(p)
    p.add_argument("--Q", type=int, default=100, help="scan depth")
    p.add_argument("--cone", choices=("all", "nonneg"), default="all")

    p = sub.add_parser("beta", help="dump the frequency-difference product table")
    common(p, with_n=True)

    p = sub.add_parser("resonance", help="two-monomial lower bound for one q")
    common(p)
    p.add_argument("--q", required=True, help="integer vector, comma-separated")

    p = sub.add_parser("selftest", help="run the validation suite")
    p.add_argument("--precision", type=int, default=256)
    p.add_argument("--samples", type=int, default=4096)
    p.add_argument("--seed", type=int, default=2718)
    p.add_argument("--out", default=None)
    p.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    p.add_argument("--quick", action="store_true", help="reduced sizes, about a minute")
    return parser


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig(command=args.command)
    cfg.precision = getattr(args, "precision", 256)
    cfg.samples = getattr(args, "samples", 4096)
    cfg.seed = getattr(args, "seed", 2718)
    cfg.out = getattr(args, "out", None)
    cfg.fmt = getattr(args, "fmt", "json")
    cfg.quick = getattr(args, "quick", False)
    cfg.force_budget = getattr(args, "force_budget", False)
    cfg.x_text = getattr(args, "x", None)
    cfg.d = getattr(args, "d", None)
    if getattr(args, "n", None) is not None:
        cfg.n_lo, cfg.n_hi = _parse_n_range(args.n)
    if getattr(args, "Q", None) is not None:
        cfg.Q = args.Q
    if getattr(args, "cone", None) is not None:
        cfg.cone = args.cone
    if getattr(args, "q", None) is not None:
        cfg.q_vector = tuple(int(v) for v in args.q.split(","))
    return cfg


COMMANDS = {
    "bounds": cmd_bounds,
    "scan": cmd_scan,
    "beta": cmd_beta,
    "resonance": cmd_resonance,
    "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = _config_from_args(args)
    try:
        return COMMANDS[cfg.command](cfg)
    except IndependenceViolation as exc:
        print(f"error: integer relation found: q={exc.q} with q.x = {exc.p}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (PrecisionExhausted, TowerOverflow, BudgetExceeded, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
