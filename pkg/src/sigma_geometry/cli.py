"""Batch command-line interface: ``sigma-geometry <command> [options]``.

stdout (or --out) carries data only; diagnostics go to stderr.  Exit codes:

    0  success
    1  other library error
    2  configuration or usage error
    3  domain error (point outside the space, inside the hole, off the chart)
    4  degenerate basis
    5  dimension exceeds the cap
    6  solver did not converge
"""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

import numpy as np

from . import core, fileio
from .errors import (
    ChartBoundary,
    ConfigError,
    DegenerateBasis,
    DimensionExceedsCap,
    DomainError,
    ExprError,
    NegativeSigma,
    NonConvergence,
    SigmaGeometryError,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_DEGENERATE = 4
EXIT_DIM_CAP = 5
EXIT_NONCONVERGENCE = 6

DEFAULT_TOL = 1e-9
CONE_TOL = 1e-6

_VALUE_OPTS = {"--p", "--q", "--u", "--basis", "--window", "--vertices"}
_NUMERIC = re.compile(r"^-[\d.]")


def _join_negative_values(argv: list[str]) -> list[str]:
    """Let ``--p -2,0`` work: argparse would read ``-2,0`` as an option."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_OPTS and i + 1 < len(argv) and _NUMERIC.match(argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def _point(text: str, space) -> np.ndarray:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad point {text!r}: expected comma-separated numbers") from None
    if space.is_finite:
        if len(vals) != 1 or vals[0] != int(vals[0]):
            raise DomainError(f"finite-space points are single integer labels, got {text!r}")
        return np.array(int(vals[0]))
    arr = np.array(vals)
    if arr.shape != (space.dim,):
        raise DomainError(f"point {text!r} needs {space.dim} coordinates")
    return arr


def _points(text: str, space) -> list[np.ndarray]:
    return [_point(chunk, space) for chunk in text.split(";") if chunk.strip()]


def _window(text: str, dim: int) -> np.ndarray:
    parts = [p for p in text.split(";") if p.strip()]
    try:
        boxes = [[float(v) for v in p.split(",")] for p in parts]
    except ValueError:
        raise ConfigError(f"bad window {text!r}") from None
    if any(len(b) != 2 for b in boxes):
        raise ConfigError("window entries are lo,hi pairs")
    if len(boxes) == 1:
        boxes = boxes * dim
    if len(boxes) != dim:
        raise ConfigError(f"window needs 1 or {dim} lo,hi pairs")
    return np.array(boxes)


def _resolution(text: str, dim: int) -> tuple[int, ...]:
    try:
        vals = [int(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"bad resolution {text!r}") from None
    if len(vals) == 1:
        vals = vals * dim
    if len(vals) != dim:
        raise ConfigError(f"resolution needs 1 or {dim} counts")
    return tuple(vals)


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _coords(space, p):
    return int(p) if space.is_finite else np.asarray(p).tolist()


# ------------------------------------------------------------------- commands

def cmd_eval(args) -> int:
    from .spaces import classify_interval, is_indefinite

    space = fileio.load_space(args.space)
    p, q = _point(args.p, space), _point(args.q, space)
    s = core.sigma(space, p, q)
    rho = "imaginary" if s < 0 else fileio.fmt(np.sqrt(2.0 * s))
    kind = str(classify_interval(space, p, q, args.tol))
    if not is_indefinite(space):
        kind += "-na"
    _emit(args, f"{fileio.fmt(s)},{rho},{kind}\n")
    return EXIT_OK


def cmd_tube(args) -> int:
    from .tubes import sample_tube

    space = fileio.load_space(args.space)
    if space.is_finite:
        raise ConfigError("tube sampling needs a coordinate space")
    basis = _points(args.basis, space)
    sample = sample_tube(
        space, basis, _window(args.window, space.dim), _resolution(args.resolution, space.dim),
        args.tol, allow_null=args.allow_null,
    )
    _emit(args, fileio.tube_csv(sample))
    return EXIT_OK


def cmd_dim(args) -> int:
    from .euclid import detect_dimension

    space = fileio.load_space(args.space)
    res = detect_dimension(space, None, args.max_dim, args.tol, args.seed, pool_size=args.pool)
    doc = {
        "dimension_found": res.dimension,
        "max_residual": res.max_residual,
        "witness_basis": [_coords(space, b) for b in res.basis],
        "seed": args.seed,
        "tol": args.tol,
    }
    _emit(args, fileio.dumps_json(doc))
    return EXIT_OK


def cmd_euclid(args) -> int:
    from .euclid import euclid_report

    space = fileio.load_space(args.space)
    rep = euclid_report(space, args.tol, args.seed, n_pairs=args.pairs, max_dim=args.max_dim)
    doc = rep.as_dict()
    doc["seed"] = args.seed
    _emit(args, fileio.dumps_json(doc))
    return EXIT_OK


def _metric_of(space):
    if space.is_finite or space.metric_field is None:
        raise ConfigError(f"space kind {space.kind!r} has no metric field for geodesics")
    return space.metric_field


def _solver(args):
    from .riemann.geodesic import SolverOptions

    return SolverOptions(nodes=args.nodes, gtol=args.gtol, max_iter=args.max_iter)


def cmd_geodesic(args) -> int:
    from .riemann.geodesic import geodesic_between, geodesic_length

    space = fileio.load_space(args.space)
    metric = _metric_of(space)
    p, q = _point(args.p, space), _point(args.q, space)
    opts = _solver(args)
    path = geodesic_between(metric, p, q, opts)
    length = geodesic_length(metric, p, q, opts)
    _emit(args, fileio.geodesic_csv(path, length))
    return EXIT_OK


def cmd_cone(args) -> int:
    from .riemann.cone import collinearity_cone

    space = fileio.load_space(args.space)
    if space.is_finite:
        raise ConfigError("the collinearity cone needs a coordinate space")
    p, q = _point(args.p, space), _point(args.q, space)
    u = _point(args.u, space)
    tol = CONE_TOL if args.tol_given is None else args.tol_given
    res = collinearity_cone(
        space, space.metric_field, p, q, u, resolution=args.resolution, tol=tol,
        fd_step=args.fd_step, seed=args.seed,
    )
    doc = res.as_dict()
    doc["tol"] = tol
    _emit(args, fileio.dumps_json(doc))
    return EXIT_OK


def cmd_identities(args) -> int:
    from .riemann.tangent import check_worldfunction_identities

    space = fileio.load_space(args.space)
    if space.is_finite:
        raise ConfigError("sigma derivatives need a coordinate space")
    p, q = _point(args.p, space), _point(args.q, space)
    diag = check_worldfunction_identities(space, p, q, args.fd_step, metric=space.metric_field)
    _emit(args, fileio.dumps_json(diag.as_dict()))
    return EXIT_OK


# --------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--space", required=True, help="space config JSON")
    common.add_argument("--tol", type=float, default=None, help=f"tolerance (default {DEFAULT_TOL:g})")
    common.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
    common.add_argument("--out", default=None, help="write output here instead of stdout")

    parser = argparse.ArgumentParser(
        prog="sigma-geometry",
        description="World-function geometry: tubes, Euclideanness tests, geodesics, cones.",
        epilog="Negative coordinates may be written as --p -2,0 or --p=-2,0.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="sigma, rho and interval kind of a pair")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("tube", parents=[common], help="grid sample of an n-th order tube (CSV)")
    p.add_argument("--basis", required=True, help="points separated by ';', e.g. 0,0,0;1,0,0")
    p.add_argument("--window", required=True, help="lo,hi for all axes or lo,hi;lo,hi;... per axis")
    p.add_argument("--resolution", default="41", help="grid count, one or per axis")
    p.add_argument("--allow-null", action="store_true", help="accept a basis of zero length")
    p.set_defaults(func=cmd_tube)

    p = sub.add_parser("dim", parents=[common], help="detect the Euclidean dimension (JSON)")
    p.add_argument("--max-dim", type=int, default=core.MAX_ORDER)
    p.add_argument("--pool", type=int, default=200, help="number of sampled points")
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("euclid", parents=[common], help="check conditions I-III (JSON)")
    p.add_argument("--pairs", type=int, default=500)
    p.add_argument("--max-dim", type=int, default=None)
    p.set_defaults(func=cmd_euclid)

    p = sub.add_parser("geodesic", parents=[common], help="geodesic path between two points (CSV)")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--nodes", type=int, default=64)
    p.add_argument("--gtol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=400)
    p.set_defaults(func=cmd_geodesic)

    p = sub.add_parser("cone", parents=[common], help="collinearity cone at x for direction u at x' (JSON)")
    p.add_argument("--p", required=True, help="x")
    p.add_argument("--q", required=True, help="x'")
    p.add_argument("--u", required=True, help="direction at x'")
    p.add_argument("--resolution", type=int, default=None, help="number of scanned directions")
    p.add_argument("--fd-step", type=float, default=1e-3)
    p.set_defaults(func=cmd_cone)

    p = sub.add_parser("identities", parents=[common], help="world-function identity residuals (JSON)")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--fd-step", type=float, default=1e-3)
    p.set_defaults(func=cmd_identities)
    return parser


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, (ConfigError, ExprError)):
        return EXIT_CONFIG
    if isinstance(exc, (DomainError, ChartBoundary, NegativeSigma)):
        return EXIT_DOMAIN
    if isinstance(exc, DegenerateBasis):
        return EXIT_DEGENERATE
    if isinstance(exc, DimensionExceedsCap):
        return EXIT_DIM_CAP
    if isinstance(exc, NonConvergence):
        return EXIT_NONCONVERGENCE
    return EXIT_ERROR


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(_join_negative_values(argv))
    args.tol_given = args.tol
    if args.tol is None:
        args.tol = DEFAULT_TOL
    try:
        return args.func(args)
    except (SigmaGeometryError, ValueError) as exc:
        code = _exit_code(exc) if isinstance(exc, SigmaGeometryError) else EXIT_CONFIG
        print(f"sigma-geometry {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
