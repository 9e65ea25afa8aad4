"""Command-line front end.

    sharpgrids basis     --spec SPEC
    sharpgrids construct --spec SPEC --n N --r R
    sharpgrids verify    --spec SPEC --n N --r R [--sample K --seed S] [--params FILE]
    sharpgrids oracle    --spec SPEC --n N --r R    |   --points FILE --r R [--spec SPEC]
    sharpgrids export    --spec SPEC --n N --r R --out DIR [--format csv|json] [--cap ROWS]

JSON reports go to stdout, one-line summaries to stderr.  Exit codes:
0 ok, 2 spec error, 3 hypothesis violation, 4 richness violation,
5 oracle guard, 6 export cap.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from .construction import (
    ConstructionParams,
    DerivationError,
    HypothesisError,
    ParametersTooSmallError,
    build_lines,
    derive_params,
)
from .incidence import (
    DEFAULT_SEED,
    ORACLE_GUARD,
    ConstructionViolation,
    OracleGuardError,
    canonical_form,
    rich_lines_oracle,
    verify_construction,
)
from .numberfield import (
    RatElement,
    SpecError,
    c_lambda,
    embed,
    load_basis_spec,
    rational_table,
    validate_table,
)

EXIT_OK = 0
EXIT_SPEC = 2
EXIT_HYPOTHESIS = 3
EXIT_RICHNESS = 4
EXIT_ORACLE_GUARD = 5
EXIT_EXPORT_CAP = 6

DEFAULT_EXPORT_CAP = 1_000_000


class CliError(Exception):
    def __init__(self, code: int, message: str, payload: dict | None = None) -> None:
        super().__init__(message)
        self.code = code
        self.payload = payload


def _dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(obj: Any, out: str | None = None) -> None:
    text = _dumps(obj)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_table(args, validate: bool = True):
    if not args.spec:
        raise CliError(EXIT_SPEC, "--spec is required")
    try:
        return load_basis_spec(args.spec, validate=validate)
    except SpecError as exc:
        raise CliError(EXIT_SPEC, str(exc)) from None


def _require_nr(args) -> tuple[int, int]:
    if args.N is None or args.r is None:
        raise CliError(EXIT_HYPOTHESIS, "--n and --r are required")
    if args.N < 1 or args.r < 1:
        raise CliError(EXIT_HYPOTHESIS, "N and r must be positive")
    if args.r * args.r > args.N:
        raise CliError(EXIT_HYPOTHESIS, f"hypothesis violated: r={args.r} exceeds sqrt(N) for N={args.N}")
    return args.N, args.r


def _params(args) -> ConstructionParams:
    table = _load_table(args)
    N, r = _require_nr(args)
    try:
        return derive_params(N, r, table)
    except (HypothesisError, ParametersTooSmallError) as exc:
        raise CliError(EXIT_HYPOTHESIS, str(exc)) from None
    except DerivationError as exc:
        raise CliError(EXIT_RICHNESS, str(exc)) from None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_basis(args) -> int:
    table = _load_table(args, validate=False)
    report = validate_table(table)
    _emit({"n": table.n, "c_lambda": c_lambda(table), "validation": report.to_dict()}, args.out)
    _note(f"basis n={table.n} C_lambda={c_lambda(table)}: {'pass' if report.passed else 'FAIL'}")
    return EXIT_OK if report.passed else EXIT_SPEC


def cmd_construct(args) -> int:
    params = _params(args)
    _emit(params.to_dict(), args.out)
    _note(f"guaranteed_lines={params.guaranteed_lines} paper_lines={params.paper_lines} "
          f"margin={params.margin}{' (degenerate)' if params.degenerate else ''}")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.params:
        table = _load_table(args)
        try:
            data = json.loads(Path(args.params).read_text(encoding="utf-8"))
            params = ConstructionParams.from_dict(data, table)
        except (OSError, ValueError, KeyError) as exc:
            raise CliError(EXIT_SPEC, f"cannot read params {args.params}: {exc}") from None
        if params.r * params.r > params.N:
            raise CliError(EXIT_HYPOTHESIS, f"hypothesis violated in params file: r={params.r}, N={params.N}")
    else:
        params = _params(args)
    try:
        report = verify_construction(params, sample_size=args.sample, seed=args.seed, workers=args.workers)
    except ConstructionViolation as exc:
        raise CliError(EXIT_RICHNESS, str(exc), exc.to_dict()) from None
    _emit(report.to_dict(), args.out)
    _note(f"{report.lines_meeting_target}/{report.lines_checked} checked lines are {params.r}-rich"
          f" (of {report.total_lines})")
    return EXIT_OK if report.all_rich else EXIT_RICHNESS


def _parse_coord(v: Any) -> Fraction:
    if isinstance(v, bool) or not isinstance(v, (int, str)):
        raise ValueError(f"coordinate must be an integer or a 'p/q' string, got {v!r}")
    return Fraction(v)


def _parse_element(v: Any, n: int) -> RatElement:
    coords = v if isinstance(v, list) else [v]
    if len(coords) != n:
        raise ValueError(f"element {v!r} does not have {n} coordinates")
    return RatElement(tuple(_parse_coord(a) for a in coords))


def load_points(path: str, n: int) -> list[tuple[RatElement, RatElement]]:
    """Read ``{"points": [[x, y], ...]}``; x and y are scalars (n = 1) or coordinate lists."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    raw = data["points"] if isinstance(data, dict) else data
    return [(_parse_element(x, n), _parse_element(y, n)) for x, y in raw]


def cmd_oracle(args) -> int:
    if args.points:
        table = _load_table(args) if args.spec else rational_table()
        if args.r is None or args.r < 1:
            raise CliError(EXIT_HYPOTHESIS, "--r must be a positive integer")
        try:
            points = load_points(args.points, table.n)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise CliError(EXIT_SPEC, f"cannot read points {args.points}: {exc}") from None
        if len(points) > ORACLE_GUARD:
            raise CliError(EXIT_ORACLE_GUARD, f"{len(points)} points exceed the oracle guard of {ORACLE_GUARD}")
        try:
            found = rich_lines_oracle(points, args.r, table, workers=args.workers)
        except ValueError as exc:
            raise CliError(EXIT_SPEC, str(exc)) from None
        _emit({"points": len(points), "r": args.r, "oracle_rich_lines": len(found)}, args.out)
        _note(f"oracle: {len(found)} lines with >= {args.r} points")
        return EXIT_OK

    params = _params(args)
    grid = params.grid
    if grid.point_count > ORACLE_GUARD:
        raise CliError(EXIT_ORACLE_GUARD,
                       f"{grid.point_count} points exceed the oracle guard of {ORACLE_GUARD}",
                       {"error": "oracle_guard", "points": grid.point_count, "guard": ORACLE_GUARD})
    points = list(grid.points())
    richness = params.achieved_richness
    try:
        found = rich_lines_oracle(points, min(params.r, richness), params.table, workers=args.workers)
    except OracleGuardError as exc:
        raise CliError(EXIT_ORACLE_GUARD, str(exc)) from None
    at_r = sum(1 for k in found.values() if k >= params.r)
    at_richness = sum(1 for k in found.values() if k >= richness)
    constructed = [canonical_form(l) for l in build_lines(params)]
    missing = sum(1 for l in constructed if found.get(l, 0) < richness)
    distinct = len(set(constructed)) == len(constructed)
    report = {
        "points": len(points),
        "r": params.r,
        "achieved_richness": richness,
        "oracle_rich_lines": at_r,
        "oracle_lines_at_achieved_richness": at_richness,
        "constructed_lines": params.guaranteed_lines,
        "constructed_lines_distinct": distinct,
        "containment": missing == 0,
        "missing_lines": missing,
        "params": params.to_dict(),
    }
    _emit(report, args.out)
    _note(f"oracle: {at_r} {params.r}-rich lines; constructed {params.guaranteed_lines}; "
          f"containment {'pass' if missing == 0 else 'FAIL'}")
    return EXIT_OK if missing == 0 and distinct else EXIT_RICHNESS


def _point_rows(params: ConstructionParams):
    n, table = params.n, params.table
    header = [f"x{i + 1}" for i in range(n)] + [f"y{i + 1}" for i in range(n)] + ["x_real", "y_real"]
    rows = (
        list(x.coords) + list(y.coords) + [embed(x, table), embed(y, table)]
        for x, y in params.grid.points()
    )
    return header, rows


def _line_rows(params: ConstructionParams):
    n, table = params.n, params.table
    header = [f"m{i + 1}" for i in range(n)] + [f"b{i + 1}" for i in range(n)] + ["slope_real", "intercept_real"]
    rows = (
        list(l.slope.coords) + list(l.intercept.coords) + [embed(l.slope, table), embed(l.intercept, table)]
        for l in build_lines(params)
    )
    return header, rows


def _write_table(path: Path, fmt: str, header: list[str], rows) -> int:
    count = 0
    with path.open("w", encoding="utf-8", newline="") as fh:
        if fmt == "csv":
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
                count += 1
        else:
            fh.write("[")
            for row in rows:
                fh.write(("," if count else "") + "\n  " + json.dumps(dict(zip(header, row))))
                count += 1
            fh.write("\n]\n")
    return count


def cmd_export(args) -> int:
    params = _params(args)
    if not args.out:
        raise CliError(EXIT_SPEC, "--out DIR is required for export")
    cap = args.cap
    n_points, n_lines = params.grid.point_count, params.guaranteed_lines
    if n_points > cap or n_lines > cap:
        raise CliError(EXIT_EXPORT_CAP, f"export of {n_points} points / {n_lines} lines exceeds the cap of {cap} rows",
                       {"error": "export_cap", "points": n_points, "lines": n_lines, "cap": cap})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    points_path = out / f"points.{args.format}"
    lines_path = out / f"lines.{args.format}"
    written_points = _write_table(points_path, args.format, *_point_rows(params))
    written_lines = _write_table(lines_path, args.format, *_line_rows(params))
    sys.stdout.write(_dumps({
        "format": args.format,
        "points_file": str(points_path),
        "lines_file": str(lines_path),
        "point_rows": written_points,
        "line_rows": written_lines,
    }))
    _note(f"wrote {written_points} points and {written_lines} lines to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sharpgrids", description="Sharp point-line incidence grids over number fields.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, nr: bool = True) -> None:
        p.add_argument("--spec", help="basis specification JSON")
        if nr:
            p.add_argument("--n", dest="N", type=int, help="target point count N")
            p.add_argument("--r", dest="r", type=int, help="richness target r")
        p.add_argument("--out", help="output path")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1)

    p = sub.add_parser("basis", help="validate a basis specification")
    common(p, nr=False)
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("construct", help="derive construction parameters")
    common(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", help="verify that every constructed line is rich")
    common(p)
    p.add_argument("--sample", type=int, help="check a seeded uniform sample of K lines")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--params", help="verify a params JSON (as printed by construct) instead of deriving")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", help="brute-force rich lines of the grid or of a point file")
    common(p)
    p.add_argument("--points", help="JSON point file; overrides --n")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("export", help="write points and lines for plotting")
    common(p)
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.add_argument("--cap", type=int, default=DEFAULT_EXPORT_CAP, help="maximum rows per file")
    p.set_defaults(func=cmd_export)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "sample", None) is not None and args.sample < 1:
        _note("error: --sample must be positive")
        return EXIT_SPEC
    try:
        return args.func(args)
    except CliError as exc:
        if exc.payload is not None:
            sys.stdout.write(_dumps(exc.payload))
        _note(f"error: {exc}")
        return exc.code


if __name__ == "__main__":
    raise SystemExit(main())
