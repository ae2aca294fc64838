"""Command-line front end: ``cauchywell {solve,scan,table,density}``.

Exit codes: 0 success, 1 usage error, 2 no bracket or absent state,
3 solver failure.  Field order of every emitted file is documented in
``schema.json`` next to this module.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
import time
from dataclasses import dataclass

from . import __version__
from .evolution import SolverParams
from .grid import make_grid
from .renorm import TailRoute
from .spectrum import (
    INFINITE_WELL_REFERENCE,
    ScanError,
    Verdict,
    density_profile,
    exists_bound_state,
    scan_threshold,
    sector_for,
    spectrum_table,
)

EXIT_OK, EXIT_USAGE, EXIT_ABSENT, EXIT_FAILURE = 0, 1, 2, 3
SEED_DESCRIPTION = "trigonometric, coarse-to-fine"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunRecord:
    """Flat record of one solve: inputs, outputs and provenance."""

    command: str
    v0: float
    l: int
    n: int
    sector: str
    tail_route: str
    cutoff_a: float
    step_dx: float
    h: float
    eig_tol: float
    max_iters: int
    scheme: str
    seed: str
    eigenvalue_at_a: float
    eigenvalue_renormalized: float
    strang_estimate: float
    iterations: int
    converged: bool
    verdict: str
    version: str
    wall_seconds: float

    _FLOATS = ("v0", "cutoff_a", "step_dx", "h", "eig_tol", "eigenvalue_at_a",
               "eigenvalue_renormalized", "strang_estimate", "wall_seconds")
    _INTS = ("l", "n", "max_iters", "iterations")

    @classmethod
    def fields(cls) -> list[str]:
        return [f.name for f in dataclasses.fields(cls)]

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunRecord":
        values = {}
        for name in cls.fields():
            raw = data[name]
            if name in cls._FLOATS:
                values[name] = float(raw)
            elif name in cls._INTS:
                values[name] = int(raw)
            elif name == "converged":
                values[name] = raw if isinstance(raw, bool) else str(raw) == "True"
            else:
                values[name] = str(raw)
        return cls(**values)

    def formatted(self, full_precision: bool = False) -> dict:
        return {k: fmt(v, full_precision) for k, v in self.to_dict().items()}

    def to_json(self, full_precision: bool = False) -> str:
        return json.dumps(self.formatted(full_precision))

    def to_csv(self, full_precision: bool = False, header: bool = True) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=self.fields(), lineterminator="\n")
        if header:
            writer.writeheader()
        writer.writerow(self.formatted(full_precision))
        return buf.getvalue()

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        return cls.from_dict(json.loads(text))


def fmt(value, full_precision: bool = False):
    """Six significant digits unless ``full_precision``; other types pass through."""
    if isinstance(value, float) and not full_precision and math.isfinite(value):
        return float(f"{value:.6g}")
    return value


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--a", type=float, default=50.0, help="cutoff a (default 50)")
    p.add_argument("--dx", type=float, default=0.001, help="grid step (default 0.001)")
    p.add_argument("--h", type=float, default=None, help="evolution step (default min(dx/4, 5e-4))")
    p.add_argument("--tol", type=float, default=1e-8, help="eigenvalue tolerance")
    p.add_argument("--max-iters", type=int, default=200_000)
    p.add_argument("--route", choices=("auto", "oned", "direct"), default="auto",
                   help="l=0 only: odd line route (auto, oned) or radial kernel (direct)")
    p.add_argument("--scheme", choices=("corrected", "skip"), default="corrected")


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group()
    group.add_argument("--json", dest="fmt", action="store_const", const="json")
    group.add_argument("--csv", dest="fmt", action="store_const", const="csv")
    p.set_defaults(fmt="json")
    p.add_argument("--full-precision", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cauchywell", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one (v0, l, n) state")
    p.add_argument("--v0", type=float, required=True)
    p.add_argument("--l", type=int, choices=(0, 1, 2), required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--dump-eigenfunction", metavar="PATH")
    _add_solver_flags(p)
    _add_output_flags(p)

    p = sub.add_parser("scan", help="bracket an existence threshold")
    p.add_argument("--l", type=int, choices=(0, 1, 2), required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--v0-from", type=float, required=True)
    p.add_argument("--v0-to", type=float, required=True)
    p.add_argument("--step", type=float, default=0.1)
    p.add_argument("--strategy", choices=("walk", "bisect"), default="walk")
    _add_solver_flags(p)
    _add_output_flags(p)

    p = sub.add_parser("table", help="eigenvalue table over v0 and (l, n)")
    p.add_argument("--v0-list", default="2.1,3.5,4.8,5.2,6.7,8.1,8.3")
    p.add_argument("--sectors", default="l0:3,l1:2,l2:2")
    p.add_argument("--output", metavar="PATH", help="write here instead of stdout")
    p.add_argument("--jobs", type=int, default=1)
    _add_solver_flags(p)
    _add_output_flags(p)

    p = sub.add_parser("density", help="|psi|^2 on an (r, theta) lattice")
    p.add_argument("--v0", type=float, required=True)
    p.add_argument("--l", type=int, choices=(0, 1, 2), required=True)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--theta-samples", type=int, default=360)
    p.add_argument("--r-max", type=float, default=3.0)
    p.add_argument("--stride", type=int, default=10)
    p.add_argument("--output", metavar="PATH", help="write here instead of stdout")
    _add_solver_flags(p)
    p.add_argument("--full-precision", action="store_true")
    return parser


def _params(args) -> SolverParams:
    return SolverParams(h=args.h, eig_tol=args.tol, max_iters=args.max_iters,
                        scheme=args.scheme)


def _sector(args, l: int | None = None):
    """Sector for ``args.l``, where ``--route`` is only legal with ``l = 0``.

    The table command passes ``l`` itself and applies the route to its l = 0 rows.
    """
    if l is None:
        l = args.l
        if l != 0 and args.route != "auto":
            raise UsageError(f"--route {args.route} only applies to l = 0")
    try:
        return sector_for(l, args.route)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _grid(args, sector):
    try:
        return make_grid(sector.grid_kind, args.a, args.dx)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _record(command, args, sector, grid, params, result, verdict, seconds) -> RunRecord:
    return RunRecord(
        command=command, v0=float(result.v0), l=sector.orbital_l, n=result.n,
        sector=sector.value, tail_route=TailRoute.for_sector(sector).kind.value,
        cutoff_a=grid.cutoff_a, step_dx=grid.step_dx, h=float(result.h),
        eig_tol=params.eig_tol, max_iters=params.max_iters, scheme=params.scheme,
        seed=SEED_DESCRIPTION, eigenvalue_at_a=float(result.eigenvalue_at_a),
        eigenvalue_renormalized=float(result.eigenvalue_renormalized),
        strang_estimate=float(result.strang_estimate), iterations=result.iterations,
        converged=result.converged, verdict=verdict.value, version=__version__,
        wall_seconds=seconds)


def _print_record(record: RunRecord, args) -> None:
    if args.fmt == "csv":
        sys.stdout.write(record.to_csv(args.full_precision))
    else:
        sys.stdout.write(record.to_json(args.full_precision) + "\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_solve(args) -> int:
    sector = _sector(args)
    grid = _grid(args, sector)
    params = _params(args)
    start = time.perf_counter()
    verdict, result = exists_bound_state(args.v0, sector, args.n, grid, params)
    record = _record("solve", args, sector, grid, params, result, verdict,
                     time.perf_counter() - start)
    _print_record(record, args)
    if args.dump_eigenfunction:
        dump_eigenfunction(result, args.dump_eigenfunction, args.full_precision)
    if verdict is Verdict.UNDETERMINED:
        return EXIT_FAILURE
    return EXIT_OK if verdict is Verdict.EXISTS else EXIT_ABSENT


def dump_eigenfunction(result, path: str, full_precision: bool = False) -> None:
    """Two-column ``r,f(r)`` text with a one-line header."""
    state = result.eigenfunction
    norm = "sector-normalised" if not state.sector.is_1d else "L2-normalised on [-a,a]"
    lines = [f"# sector={state.sector.value} n={result.n} v0={result.v0} "
             f"a={state.grid.cutoff_a} dx={state.grid.step_dx} normalization={norm}",
             "r,f(r)"]
    for r, f in zip(state.grid.nodes, state.samples):
        lines.append(f"{r!r},{f!r}" if full_precision else f"{r:.6g},{f:.6g}")
    _emit("\n".join(lines) + "\n", path)


def cmd_scan(args) -> int:
    sector = _sector(args)
    grid = _grid(args, sector)
    params = _params(args)
    try:
        report = scan_threshold(sector, args.n, args.v0_from, args.v0_to, args.step,
                                grid, params, strategy=args.strategy)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    fp = args.full_precision
    upper = report.upper_result
    data = {
        "l": args.l, "n": args.n, "sector": sector.value, "found": report.found,
        "v0_lower": fmt(report.v0_lower, fp), "v0_upper": fmt(report.v0_upper, fp),
        "resolution": fmt(report.resolution, fp), "cutoff_a": grid.cutoff_a,
        "step_dx": grid.step_dx,
        "eigenvalue_at_a": fmt(upper.eigenvalue_at_a, fp) if upper else None,
        "eigenvalue_renormalized": fmt(upper.eigenvalue_renormalized, fp) if upper else None,
        "tail_route": TailRoute.for_sector(sector).kind.value,
    }
    if args.fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(data), lineterminator="\n")
        writer.writeheader()
        writer.writerow(data)
        sys.stdout.write(buf.getvalue())
    else:
        sys.stdout.write(json.dumps(data) + "\n")
    return EXIT_OK if report.found else EXIT_ABSENT


def parse_sectors(text: str) -> dict[int, int]:
    """``"l0:3,l1:2"`` -> ``{0: 3, 1: 2}``."""
    out = {}
    for item in text.split(","):
        try:
            name, count = item.strip().split(":")
            if not name.startswith("l"):
                raise ValueError
            out[int(name[1:])] = int(count)
        except ValueError:
            raise UsageError(f"bad sector spec {item!r}; expected e.g. l0:3") from None
    return out


def table_records(table, full_precision=False) -> list[dict]:
    rows = []
    for l, n in table.rows:
        for v0 in table.v0_values:
            cell = table.cell(l, n, v0)
            rows.append({
                "l": l, "n": n, "v0": v0, "verdict": cell.verdict.value,
                "route": cell.route,
                "eigenvalue_at_a": fmt(cell.eigenvalue_at_a, full_precision),
                "eigenvalue_renormalized": fmt(cell.eigenvalue_renormalized, full_precision),
                "infinite_well_reference": table.reference(l, n),
            })
    return rows


def table_csv(table, full_precision=False) -> str:
    """Grid layout: one row per (l, n), one column per v0, '-' for absent."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["l", "n"] + [f"{v:g}" for v in table.v0_values]
                    + ["infinite_well_reference"])
    for l, n in table.rows:
        row = [l, n]
        for v0 in table.v0_values:
            cell = table.cell(l, n, v0)
            if cell.verdict is Verdict.UNDETERMINED:
                row.append("fail")
            elif not cell.present:
                row.append("-")
            else:
                row.append(fmt(cell.eigenvalue_renormalized, full_precision))
        ref = INFINITE_WELL_REFERENCE.get((l, n))
        row.append("" if ref is None else ref)
        writer.writerow(row)
    return buf.getvalue()


def cmd_table(args) -> int:
    try:
        v0_values = [float(v) for v in args.v0_list.split(",")]
    except ValueError:
        raise UsageError(f"bad --v0-list {args.v0_list!r}") from None
    sectors = parse_sectors(args.sectors)
    for l in sectors:
        _sector(args, l)
    params = _params(args)
    table = spectrum_table(v0_values, sectors, lambda s: _grid(args, s), params,
                           args.route, jobs=args.jobs)
    if args.fmt == "csv":
        text = table_csv(table, args.full_precision)
    else:
        text = "".join(json.dumps(r) + "\n" for r in table_records(table, args.full_precision))
    _emit(text, args.output)
    failed = any(c.verdict is Verdict.UNDETERMINED for c in table.cells.values())
    return EXIT_FAILURE if failed else EXIT_OK


def cmd_density(args) -> int:
    if abs(args.m) > args.l:
        raise UsageError(f"|m| must not exceed l (got l={args.l}, m={args.m})")
    sector = _sector(args)
    grid = _grid(args, sector)
    verdict, result = exists_bound_state(args.v0, sector, args.n, grid, _params(args))
    if verdict is Verdict.UNDETERMINED:
        return EXIT_FAILURE
    field = density_profile(result, args.l, args.m, args.theta_samples,
                            r_max=args.r_max, stride=args.stride)
    lines = ["r,theta,density"]
    for r, t, d in field.triples():
        lines.append(f"{r!r},{t!r},{d!r}" if args.full_precision
                     else f"{r:.6g},{t:.6g},{d:.6g}")
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK if verdict is Verdict.EXISTS else EXIT_ABSENT


COMMANDS = {"solve": cmd_solve, "scan": cmd_scan, "table": cmd_table, "density": cmd_density}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"cauchywell {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ScanError as exc:
        print(f"cauchywell {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except (FloatingPointError, ArithmeticError) as exc:
        print(f"cauchywell {args.command}: solver failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
