"""Command-line interface: sampling, evaluation, transforms, checks.

Parameter files are UTF-8 JSON::

    {
      "family": "mal" | "mgal" | "tal" | "tgal",
      "location": <nested array>,
      "scales": [<square matrix>, ...],
      "lambda": <number>          # mgal/tgal only; forbidden for mal/tal
    }

Matrix families take two scales (rows, columns); tensor families one
per mode.  Sample files are CSV with a header naming the linearized
indices, one draw per row in mode-1-fastest order, floats at 17
significant digits so round trips are lossless.  ``check`` emits one
JSON report per line.

Exit codes: 0 success, 1 validation failure, 2 check-suite failure,
64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .distributions import (
    MgalParams,
    Params,
    TgalParams,
    cf,
    log_pdf,
    sample,
    transform_mgal,
)
from .linalg import NotPositiveDefiniteError, SpdMatrix, unvec
from .rng import RngStream
from .validation import CfGrid, analytic_cf, make_cf_grid, run_check_suite

__all__ = ["ParamsError", "parse_params", "run", "main"]

_FAMILIES = ("mal", "mgal", "tal", "tgal")
_FLOAT_FMT = "%.17g"

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_CHECK_FAILED = 2
EXIT_USAGE = 64


class ParamsError(ValueError):
    """A parameter file failed validation."""


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we want 64
        raise _UsageError(message)


def read_params_file(path) -> Tuple[str, Params]:
    """Load and validate a parameter file; returns (family, params)."""
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParamsError(f"cannot read parameter file {path}: {exc}") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParamsError(f"parameter file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ParamsError("parameter file must hold a JSON object")

    family = data.get("family")
    if family not in _FAMILIES:
        raise ParamsError(f"unknown family {family!r}; expected one of {_FAMILIES}")
    if "location" not in data or "scales" not in data:
        raise ParamsError("parameter file needs 'location' and 'scales'")

    generalized = family in ("mgal", "tgal")
    if generalized:
        if "lambda" not in data:
            raise ParamsError(f"family {family!r} requires 'lambda'")
        try:
            lam = float(data["lambda"])
        except (TypeError, ValueError) as exc:
            raise ParamsError(f"'lambda' is not a number: {data['lambda']!r}") from exc
    else:
        if "lambda" in data:
            raise ParamsError(f"family {family!r} does not take 'lambda'")
        lam = 1.0

    try:
        location = np.asarray(data["location"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParamsError(f"'location' is not a numeric array: {exc}") from exc

    scales_raw = data["scales"]
    if not isinstance(scales_raw, list) or not scales_raw:
        raise ParamsError("'scales' must be a non-empty list of square matrices")
    scales = []
    for i, s in enumerate(scales_raw):
        try:
            scales.append(SpdMatrix(np.asarray(s, dtype=float)))
        except NotPositiveDefiniteError as exc:
            raise ParamsError(f"scales[{i}] is not positive definite: {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise ParamsError(f"scales[{i}] is invalid: {exc}") from exc

    try:
        if family in ("mal", "mgal"):
            if location.ndim != 2:
                raise ValueError(f"matrix family location must be 2-d, got ndim {location.ndim}")
            if len(scales) != 2:
                raise ValueError(f"matrix family takes 2 scales, got {len(scales)}")
            params: Params = MgalParams(m=location, sigma=scales[0], psi=scales[1], lam=lam)
        else:
            params = TgalParams(m=location, sigmas=tuple(scales), lam=lam)
    except (NotPositiveDefiniteError, ValueError) as exc:
        raise ParamsError(str(exc)) from exc
    return family, params


def parse_params(path) -> Params:
    """Validated parameter bundle from a JSON file (family-agnostic view)."""
    return read_params_file(path)[1]


def write_params_file(path, family: str, params: Params) -> None:
    if isinstance(params, MgalParams):
        scales = [params.sigma.entries.tolist(), params.psi.entries.tolist()]
    else:
        scales = [s.entries.tolist() for s in params.sigmas]
    data = {"family": family, "location": params.m.tolist(), "scales": scales}
    if family in ("mgal", "tgal"):
        data["lambda"] = params.lam
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def _vec_header(dims: Sequence[int]) -> List[str]:
    # mode-1-fastest multi-indices
    names = []
    for ix in np.ndindex(*tuple(reversed(dims))):
        names.append("x[" + ",".join(str(i) for i in reversed(ix)) + "]")
    return names


def _format_row(values: np.ndarray) -> str:
    return ",".join(_FLOAT_FMT % v for v in values)


def _write_vec_csv(path, dims: Sequence[int], rows: np.ndarray) -> None:
    lines = [",".join(_vec_header(dims))]
    lines.extend(_format_row(r) for r in rows)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _read_vec_csv(path, total_dim: int) -> np.ndarray:
    try:
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ParamsError(f"cannot read CSV {path}: {exc}") from exc
    if rows.shape[1] != total_dim:
        raise ParamsError(
            f"CSV {path} has {rows.shape[1]} columns, expected {total_dim}"
        )
    return rows


def _read_matrix_csv(path) -> np.ndarray:
    try:
        return np.loadtxt(path, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise ParamsError(f"cannot read matrix CSV {path}: {exc}") from exc


def _parse_point(text: str, dims: Tuple[int, ...]) -> np.ndarray:
    try:
        value = np.asarray(json.loads(text), dtype=float)
    except (json.JSONDecodeError, TypeError, ValueError) as exc:
        raise ParamsError(f"--point is not a JSON numeric array: {exc}") from exc
    total = int(np.prod(dims))
    if value.ndim == 0 and total == 1:
        return value.reshape(dims)
    if value.shape != dims:
        raise ParamsError(f"point of shape {value.shape} does not match dims {dims}")
    return value


def _dims_of(params: Params) -> Tuple[int, ...]:
    return params.shape if isinstance(params, MgalParams) else params.dims


def build_parser() -> _Parser:
    parser = _Parser(prog="tensorlaplace", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command")

    p_sample = sub.add_parser("sample", help="draw and write a CSV of samples")
    p_sample.add_argument("--params", required=True)
    p_sample.add_argument("--count", type=int, required=True)
    p_sample.add_argument("--seed", type=int, required=True)
    p_sample.add_argument("--out", required=True)

    p_logpdf = sub.add_parser("logpdf", help="evaluate the log-density")
    p_logpdf.add_argument("--params", required=True)
    group = p_logpdf.add_mutually_exclusive_group(required=True)
    group.add_argument("--point", help="JSON value matching the family dims")
    group.add_argument("--batch", help="CSV of linearized draws (as written by sample)")

    p_cf = sub.add_parser("cf", help="evaluate the characteristic function")
    p_cf.add_argument("--params", required=True)
    group = p_cf.add_mutually_exclusive_group(required=True)
    group.add_argument("--grid", help="CSV of linearized frequency points")
    group.add_argument("--auto-grid", action="store_true",
                       help="generate a seeded grid (requires --out)")
    p_cf.add_argument("--seed", type=int, default=0)
    p_cf.add_argument("--out", help="write values here (grid lands next to it)")

    p_tr = sub.add_parser("transform", help="apply a left/right affine transform")
    p_tr.add_argument("--params", required=True)
    p_tr.add_argument("--left", help="CSV matrix applied on the left (default identity)")
    p_tr.add_argument("--right", help="CSV matrix applied on the right (default identity)")
    p_tr.add_argument("--out", required=True)

    p_check = sub.add_parser("check", help="run the verification suite")
    p_check.add_argument("--params", required=True)
    p_check.add_argument("--suite", choices=("fast", "full"), default="fast")
    p_check.add_argument("--seed", type=int, default=0)

    return parser


def _cmd_sample(args) -> int:
    _, params = read_params_file(args.params)
    batch = sample(params, args.count, RngStream(args.seed))
    _write_vec_csv(args.out, _dims_of(params), batch.vec_draws())
    return EXIT_OK


def _cmd_logpdf(args) -> int:
    _, params = read_params_file(args.params)
    dims = _dims_of(params)
    if args.point is not None:
        value = log_pdf(params, _parse_point(args.point, dims))
        print(_FLOAT_FMT % value)
        return EXIT_OK
    rows = _read_vec_csv(args.batch, params.total_dim)
    for row in rows:
        print(_FLOAT_FMT % log_pdf(params, unvec(row, dims)))
    return EXIT_OK


def _cmd_cf(args) -> int:
    _, params = read_params_file(args.params)
    dims = _dims_of(params)
    if args.auto_grid:
        if not args.out:
            raise _UsageError("--auto-grid requires --out so the grid can be saved")
        grid = make_cf_grid(params, seed=args.seed)
    else:
        rows = _read_vec_csv(args.grid, params.total_dim)
        pts = np.stack([unvec(r, dims) for r in rows])
        if not np.any(pts[0]):
            grid = CfGrid(points=pts, seed=args.seed)
        else:
            grid = CfGrid(points=np.concatenate([np.zeros((1,) + tuple(dims)), pts]), seed=args.seed)
    values = analytic_cf(params, grid)
    lines = ["re,im"]
    lines.extend(f"{_FLOAT_FMT % v.real},{_FLOAT_FMT % v.imag}" for v in values)
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        _write_vec_csv(str(args.out) + ".grid.csv", dims, grid.vec_points())
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_transform(args) -> int:
    family, params = read_params_file(args.params)
    if not isinstance(params, MgalParams):
        raise ParamsError("transform applies to matrix families (mal, mgal) only")
    k, n = params.shape
    left = _read_matrix_csv(args.left) if args.left else np.eye(k)
    right = _read_matrix_csv(args.right) if args.right else np.eye(n)
    transformed = transform_mgal(params, left, right)
    write_params_file(args.out, family, transformed)
    return EXIT_OK


def _cmd_check(args) -> int:
    _, params = read_params_file(args.params)
    reports = run_check_suite(params, suite=args.suite, seed=args.seed)
    for report in reports:
        print(report.to_json())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK_FAILED


_COMMANDS = {
    "sample": _cmd_sample,
    "logpdf": _cmd_logpdf,
    "cf": _cmd_cf,
    "transform": _cmd_transform,
    "check": _cmd_check,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse and execute; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
        if args.command is None:
            raise _UsageError("a subcommand is required")
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParamsError, NotPositiveDefiniteError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
