"""Membership predicates for elementary geometric objects, and tube sampling.

Every predicate returns a MembershipResult holding the raw defining
expression, the tolerance actually applied (``tol * scale``) and the
verdict.  Scales make the tolerance dimensionless; they are documented per
predicate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import core
from ._parallel import ordered_map
from .core import ABS_FLOOR, DEFAULT_TOL, SigmaSpace
from .errors import DegenerateBasis, ImaginaryArea, NegativeSigma, ZeroVector


@dataclass(frozen=True)
class MembershipResult:
    member: bool
    residual: float
    tol_used: float

    def __bool__(self) -> bool:
        return self.member


@dataclass(frozen=True)
class TubeSample:
    points: np.ndarray  # (k, dim) accepted grid points in grid order
    residuals: np.ndarray  # (k,)
    window: tuple
    resolution: tuple
    tol: float
    examined: int = 0
    extra: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.points)


def _result(residual: float, tol: float, scale: float) -> MembershipResult:
    used = max(tol, ABS_FLOOR) * scale
    return MembershipResult(bool(abs(residual) <= used), float(residual), float(used))


def sphere_contains(space: SigmaSpace, center, through, r, tol: float = DEFAULT_TOL) -> MembershipResult:
    """R lies on the sphere S(O; P): sigma(O, R) = sigma(O, P)."""
    s_p = core.sigma(space, center, through)
    s_r = core.sigma(space, center, r)
    return _result(s_r - s_p, tol, max(1.0, 2 * abs(s_p), 2 * abs(s_r)))


def _area_sq(space, p1, p2, r) -> float:
    return core.gram(space, [p1, p2, r]).determinant


def cylinder_contains(space: SigmaSpace, p1, p2, through, r, tol: float = DEFAULT_TOL) -> MembershipResult:
    """R lies on the circular cylinder with axis P1P2 through P: equal triangle areas S_2."""
    f1 = 2.0 * core.sigma(space, p1, p2)
    if abs(f1) <= max(tol, ABS_FLOOR):
        raise DegenerateBasis("cylinder axis has vanishing squared length")
    fp = _area_sq(space, p1, p2, through)
    fr = _area_sq(space, p1, p2, r)
    lengths = max(1.0, abs(f1), 2 * abs(core.sigma(space, p1, through)), 2 * abs(core.sigma(space, p1, r)))
    floor = max(tol, ABS_FLOOR) * lengths * lengths
    for name, f in (("P", fp), ("R", fr)):
        if f < -floor:
            raise ImaginaryArea(f"F_2(P1, P2, {name}) = {f!r} < 0; the area S_2 is imaginary")
    sp = 0.5 * math.sqrt(max(fp, 0.0))
    sr = 0.5 * math.sqrt(max(fr, 0.0))
    return _result(sr - sp, tol, max(1.0, sp, sr, 0.5 * abs(f1)))


def ellipsoid_contains(space: SigmaSpace, f1, f2, through, r, tol: float = DEFAULT_TOL) -> MembershipResult:
    """rho(F1, R) + rho(F2, R) = rho(F1, P) + rho(F2, P)."""
    target = core.metric(space, f1, through) + core.metric(space, f2, through)
    got = core.metric(space, f1, r) + core.metric(space, f2, r)
    return _result(got - target, tol, max(1.0, target))


def segment_contains(space: SigmaSpace, p1, p2, r, tol: float = DEFAULT_TOL) -> MembershipResult:
    """rho(P1, R) + rho(P2, R) = rho(P1, P2); the metric segment between P1 and P2."""
    d12 = core.metric(space, p1, p2)
    got = core.metric(space, p1, r) + core.metric(space, p2, r)
    return _result(got - d12, tol, max(1.0, d12))


def _basis_scale(space: SigmaSpace, pts) -> float:
    s0i = space.along(pts[0], pts[1:])
    return max(1.0, float(np.max(2.0 * np.abs(s0i))))


def _check_basis(space: SigmaSpace, basis, tol: float, allow_null: bool) -> tuple[np.ndarray, float, float, bool]:
    """Returns (points, F_n, basis scale, null flag)."""
    pts = core._point_list(space, basis)
    res = core.gram(space, pts)
    n = res.order
    s = _basis_scale(space, pts)
    if abs(res.determinant) > max(tol, ABS_FLOOR) * s**n:
        return pts, res.determinant, s, False
    if not allow_null:
        raise DegenerateBasis(
            f"F_{n} = {res.determinant!r} vanishes within tolerance; the tube needs a basis of nonzero length"
        )
    for i, j in itertools.combinations(range(len(pts)), 2):
        if space.same_point(pts[i], pts[j]):
            raise DegenerateBasis(f"basis points {i} and {j} coincide")
    return pts, res.determinant, s, True


def _tube_residuals(space, pts, Fn, s, null, R) -> np.ndarray:
    F_next, _, scale = core.extension_determinants(space, pts, R)
    n = len(pts) - 1
    denom = (s**n if null else abs(Fn)) * scale
    return F_next / denom


def tube_contains(space: SigmaSpace, basis: Sequence, r, tol: float = DEFAULT_TOL, *, allow_null: bool = False) -> MembershipResult:
    """F_{n+1}(basis, r) = 0, normalised by |F_n| times the squared-length scale of r.

    With ``allow_null`` a basis of vanishing length (e.g. a null vector in
    Minkowski space) is accepted as long as its points are distinct; the
    normalisation then uses the basis scale s**n instead of |F_n|.
    """
    pts, Fn, s, null = _check_basis(space, basis, tol, allow_null)
    R = core._point_list(space, [r])
    res = float(_tube_residuals(space, pts, Fn, s, null, R)[0])
    return _result(res, tol, 1.0)


def tube_through_point_contains(space: SigmaSpace, p0, p1, q0, r, tol: float = DEFAULT_TOL) -> MembershipResult:
    """Q0R is collinear to P0P1: (P0P1.Q0R)^2 = |P0P1|^2 |Q0R|^2.

    Null Q0R is allowed (it is a member exactly when orthogonal to P0P1);
    only r = q0 is rejected.
    """
    if space.same_point(q0, r, tol=0.0):
        raise ZeroVector("r coincides with q0; the vector Q0R vanishes")
    res, ab, aa, bb = core.collinearity_residual(space, p0, p1, q0, r)
    if abs(aa) <= max(tol, ABS_FLOOR):
        raise ZeroVector("|P0P1|^2 vanishes")
    return _result(res, tol, max(1.0, abs(aa * bb), ab * ab))


def _normalise_grid(dim: int, window, resolution) -> tuple[tuple, tuple]:
    window = np.asarray(window, dtype=float)
    if window.shape == (2,):
        window = np.tile(window, (dim, 1))
    if window.shape != (dim, 2):
        raise ValueError(f"window must give (lo, hi) for each of {dim} axes")
    if np.ndim(resolution) == 0:
        resolution = (int(resolution),) * dim
    resolution = tuple(int(k) for k in resolution)
    if len(resolution) != dim:
        raise ValueError(f"resolution needs {dim} entries")
    return tuple(map(tuple, window.tolist())), resolution


def grid_points(window, resolution) -> np.ndarray:
    """Grid nodes in C (row-major) order: the last axis varies fastest."""
    axes = []
    for (lo, hi), k in zip(window, resolution):
        if k < 1:
            raise ValueError("resolution must be positive")
        axes.append(np.array([lo]) if k == 1 or lo == hi else np.linspace(lo, hi, k))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def sample_tube(
    space: SigmaSpace,
    basis: Sequence,
    window,
    resolution,
    tol: float = DEFAULT_TOL,
    *,
    allow_null: bool = False,
    threads: int | None = None,
    chunk: int = 8192,
) -> TubeSample:
    """Grid points of the window that pass tube_contains, in grid-index order."""
    if space.is_finite:
        raise ValueError("grid sampling needs a coordinate space")
    window, resolution = _normalise_grid(space.dim, window, resolution)
    if min(resolution) < 2:
        raise ValueError("resolution must be at least 2 per axis")
    pts, Fn, s, null = _check_basis(space, basis, tol, allow_null)
    grid = grid_points(window, resolution)
    inside = space.contains(grid)
    grid = grid[inside]
    chunks = [grid[i : i + chunk] for i in range(0, len(grid), chunk)]
    parts = ordered_map(lambda R: _tube_residuals(space, pts, Fn, s, null, R), chunks, threads)
    res = np.concatenate(parts) if parts else np.empty(0)
    keep = np.abs(res) <= max(tol, ABS_FLOOR)
    return TubeSample(
        grid[keep], res[keep], window, resolution, tol, examined=len(grid),
        extra={"null_basis": null},
    )


def _segment_residuals(space, a, b, R) -> tuple[np.ndarray, np.ndarray]:
    sa = space.along(a, R)
    sb = space.along(b, R)
    ok = (sa >= 0) & (sb >= 0)
    d = core.metric(space, a, b)
    res = np.full(len(R), np.inf)
    res[ok] = np.sqrt(2 * sa[ok]) + np.sqrt(2 * sb[ok]) - d
    return res, max(1.0, d)


def broken_tube(space: SigmaSpace, vertices: Sequence, per_segment_resolution, tol: float = DEFAULT_TOL) -> TubeSample:
    """Union over consecutive links of the grid points passing segment_contains.

    Each link is sampled on the grid spanning its coordinate bounding box.
    Grid points with a negative sigma to either end are not members.
    """
    if space.is_finite:
        raise ValueError("grid sampling needs a coordinate space")
    V = core._point_list(space, vertices)
    if len(V) < 2:
        raise ValueError("a broken line needs at least two vertices")
    for a, b in zip(V[:-1], V[1:]):
        s = core.sigma(space, a, b)
        if s < 0:
            raise NegativeSigma(s, f"link {a.tolist()} -> {b.tolist()} has sigma {s!r} < 0")
    seen: set[tuple] = set()
    pts: list[np.ndarray] = []
    res: list[float] = []
    windows = []
    examined = 0
    for a, b in zip(V[:-1], V[1:]):
        win = tuple((float(min(p, q)), float(max(p, q))) for p, q in zip(a, b))
        _, resolution = _normalise_grid(space.dim, win, per_segment_resolution)
        windows.append(win)
        grid = grid_points(win, resolution)
        examined += len(grid)
        r, scale = _segment_residuals(space, a, b, grid)
        keep = np.abs(r) <= max(tol, ABS_FLOOR) * scale
        for p, v in zip(grid[keep], r[keep]):
            key = tuple(p.tolist())
            if key not in seen:
                seen.add(key)
                pts.append(p)
                res.append(float(v))
    points = np.array(pts) if pts else np.empty((0, space.dim))
    _, resolution = _normalise_grid(space.dim, windows[0], per_segment_resolution)
    return TubeSample(points, np.array(res), tuple(windows), resolution, tol, examined=examined)
