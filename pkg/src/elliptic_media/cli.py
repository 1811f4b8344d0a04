"""Command-line front end.

Exit codes: 0 elliptic / coercive, 1 error, 2 non-elliptic, 3 empty common
Theta-set.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np

from .arcset import ArcSet
from .certify import DEFAULT_GRID, CertifyOptions, certify, uniform_grid, xi_minus_curve
from .coercivity import (
    VERDICT_COERCIVE,
    VERDICT_FREDHOLM,
    CoercivityError,
    UserAssertions,
    coercivity_report,
    problem_from_dict,
    term_curves,
)
from .fieldmodel import FieldError, Parametric, SamplingSpec, field_from_dict, field_to_dict, MaterialField
from .media import CATALOG_SCHEMAS
from .verify import run_suite

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NON_ELLIPTIC = 2
EXIT_EMPTY_COMMON = 3

ANGLE_KEYS = {"start", "end", "theta", "theta_star", "phase_range"}


class CliError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: list
    output: Optional[str]
    grid: int
    seed: int
    format: str
    degrees: bool = False


# -- output ---------------------------------------------------------------------------


def _jsonable(obj: Any, degrees: bool = False, key: str | None = None) -> Any:
    if isinstance(obj, dict):
        return {k: _jsonable(v, degrees, k) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v, degrees, key) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if degrees and key in ANGLE_KEYS:
            v = math.degrees(v)
        if not math.isfinite(v):
            return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
        return v
    return obj


def dump_json(obj: Any, degrees: bool = False) -> str:
    data = _jsonable(obj, degrees)
    if degrees and isinstance(data, dict):
        data["angle_unit"] = "deg"
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    return format(float(v), ".17g")


def dump_csv(header: Sequence[str], rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_output(text: str, path: Optional[str]) -> None:
    """Write atomically through a temporary file; stdout when no path."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_json(path: str) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}") from None


def _load_field(path: str) -> MaterialField:
    try:
        f = field_from_dict(read_json(path))
        f.samples  # materialize now so model errors surface as input errors
        return f
    except (FieldError, ValueError) as exc:
        raise CliError(f"{path}: {exc}") from None


def _theta_angle(v: float, degrees: bool) -> float:
    return math.degrees(v) if degrees else v


# -- commands ---------------------------------------------------------------------------


def cmd_certify(args) -> int:
    f = _load_field(args.input)
    c = certify(f, CertifyOptions(grid=args.grid))
    out = c.to_dict()
    if args.format == "csv":
        rows = [(s, e, sc, ec) for s, e, sc, ec in c.theta_set.intervals()]
        rows = [(_theta_angle(s, args.degrees), _theta_angle(e, args.degrees), sc, ec) for s, e, sc, ec in rows]
        write_output(dump_csv(["start", "end", "start_closed", "end_closed"], rows), args.output)
    else:
        write_output(dump_json(out, args.degrees), args.output)
    return EXIT_OK if c.elliptic else EXIT_NON_ELLIPTIC


def cmd_theta(args) -> int:
    f = _load_field(args.input)
    c = certify(f, CertifyOptions(grid=args.grid))
    grid = uniform_grid(args.grid)
    curve = xi_minus_curve(f, grid)
    inside = [c.theta_set.contains(float(t)) for t in grid]
    if args.format == "csv":
        rows = [(_theta_angle(t, args.degrees), v, m) for t, v, m in zip(grid, curve, inside)]
        write_output(dump_csv(["theta", "xi_minus", "in_theta_set"], rows), args.output)
    else:
        out = {
            "field": f.name,
            "theta_set": c.theta_set.to_json(),
            "method": c.method.value,
            "curve": [{"theta": float(t), "xi_minus": float(v), "in_theta_set": m} for t, v, m in zip(grid, curve, inside)],
        }
        write_output(dump_json(out, args.degrees), args.output)
    return EXIT_OK if c.elliptic else EXIT_NON_ELLIPTIC


def cmd_coercivity(args) -> int:
    assertions = UserAssertions(args.assert_geometry_I, args.assert_geometry_II, args.assert_alpha_regularity)
    try:
        p = problem_from_dict(read_json(args.input), assertions)
        for fld in (p.eps, p.mu, p.alpha):
            if fld is not None:
                fld.samples
    except (CoercivityError, FieldError) as exc:
        raise CliError(f"{args.input}: {exc}") from None
    rep = coercivity_report(p, CertifyOptions(grid=args.grid))
    if args.format == "csv":
        write_output(_curve_csv(p, args.grid, args.degrees), args.output)
    else:
        write_output(dump_json(rep.to_dict(), args.degrees), args.output)
    if args.curve:
        write_output(_curve_csv(p, args.grid, args.degrees), args.curve)
    for w in rep.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if rep.verdict == VERDICT_COERCIVE:
        return EXIT_OK
    if rep.verdict == VERDICT_FREDHOLM:
        return EXIT_EMPTY_COMMON
    return EXIT_NON_ELLIPTIC


def _curve_csv(p, n: int, degrees: bool) -> str:
    t = term_curves(p, uniform_grid(n))
    bnd = t.get("boundary_term", [None] * len(t["theta"]))
    rows = [
        (_theta_angle(th, degrees), cu, ma, b, c)
        for th, cu, ma, b, c in zip(t["theta"], t["curl_term"], t["mass_term"], bnd, t["c"])
    ]
    return dump_csv(["theta", "curl_term", "mass_term", "boundary_term", "c"], rows)


def _parse_axis(spec: str):
    name, _, rng = spec.partition("=")
    parts = rng.split(":")
    if not name or len(parts) not in (2, 3):
        raise CliError(f"bad --axis {spec!r}; expected name=lo:hi[:count]")
    try:
        vals = [float(parts[0]), float(parts[1])] + ([int(parts[2])] if len(parts) == 3 else [])
    except ValueError:
        raise CliError(f"bad --axis {spec!r}; expected name=lo:hi[:count]") from None
    return name, tuple(vals)


def cmd_media(args) -> int:
    if args.action == "list":
        write_output(dump_json({"models": CATALOG_SCHEMAS}), args.output)
        return EXIT_OK
    if not args.model:
        raise CliError("media emit requires --model")
    params: dict = {}
    if args.input:
        params.update(read_json(args.input))
    if args.params:
        try:
            params.update(json.loads(args.params))
        except json.JSONDecodeError as exc:
            raise CliError(f"--params:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    axes = dict(_parse_axis(a) for a in args.axis or [])
    try:
        f = MaterialField(
            args.name or args.model,
            CATALOG_SCHEMAS[args.model]["dim"] if args.model in CATALOG_SCHEMAS else 3,
            Parametric(args.model, params, SamplingSpec.of(**axes)),
        )
        f.samples
        data = field_to_dict(f) if args.definition else _explicit(f)
    except (FieldError, ValueError, KeyError) as exc:
        raise CliError(f"media emit: {exc}") from None
    write_output(dump_json(data), args.output)
    return EXIT_OK


def _explicit(f: MaterialField) -> dict:
    from .fieldmodel import ExplicitSamples

    return field_to_dict(MaterialField(f.name, f.dim, ExplicitSamples(tuple(f.samples))))


def cmd_verify(args) -> int:
    rep = run_suite(seed=args.seed, n=args.grid, perturb=args.perturb)
    if args.format == "csv":
        rows = [(c["name"], "pass" if c["passed"] else "fail") for c in rep["checks"]]
        text = "name,result\n" + "".join(f"{n},{r}\n" for n, r in rows)
        write_output(text, args.output)
    else:
        write_output(dump_json(rep), args.output)
    print(f"verify: {rep['passed']} passed, {rep['failed']} failed", file=sys.stderr)
    return EXIT_OK if rep["failed"] == 0 else EXIT_NON_ELLIPTIC


# -- parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="output path (stdout when omitted)")
    common.add_argument("--grid", type=int, default=DEFAULT_GRID, help="angular scan resolution N")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--degrees", action="store_true", help="present angles in degrees")

    parser = argparse.ArgumentParser(prog="elliptic-media", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", parents=[common], help="certify ellipticity of a field")
    p.add_argument("--input", "-i", required=True)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("theta", parents=[common], help="Theta-set and xi_minus curve of a field")
    p.add_argument("--input", "-i", required=True)
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("coercivity", parents=[common], help="coercivity analysis of a problem")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--curve", help="also write the c(theta) curve as CSV")
    p.add_argument("--assert-geometry-I", dest="assert_geometry_I", action="store_true")
    p.add_argument("--assert-geometry-II", dest="assert_geometry_II", action="store_true")
    p.add_argument("--assert-alpha-regularity", dest="assert_alpha_regularity", action="store_true")
    p.set_defaults(func=cmd_coercivity)

    p = sub.add_parser("media", parents=[common], help="catalog models")
    p.add_argument("action", choices=("list", "emit"))
    p.add_argument("--model")
    p.add_argument("--name")
    p.add_argument("--input", "-i", help="JSON file with model parameters")
    p.add_argument("--params", help="inline JSON model parameters")
    p.add_argument("--axis", action="append", help="sampling axis name=lo:hi[:count]")
    p.add_argument("--definition", action="store_true", help="emit the parametric definition instead of samples")
    p.set_defaults(func=cmd_media)

    p = sub.add_parser("verify", parents=[common], help="run the seeded oracle suite")
    p.add_argument("--perturb", action="store_true", help="inject a formula sign error (self-test)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.grid < 16:
        print("error: --grid must be at least 16", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (FieldError, CoercivityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
