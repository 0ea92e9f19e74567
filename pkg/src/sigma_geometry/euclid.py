"""Euclideanness test: dimension detection, charts and the three conditions.

A sigma-space is n-dimensional Euclidean when

I.   some n-th order basis has F_n != 0 while every extension has F_{n+1} = 0,
II.  sigma equals the quadratic form of the covariant coordinates
     x_i(P) = Gamma(P0, Pi, P) with the inverse of g_ik = Gamma(P0, Pi, Pk),
III. every coordinate vector is attained by exactly one point.

Conditions I and II are checked on sampled points and pairs.  Condition III
is checked on a finite grid of coordinate vectors for coordinate spaces, and
only as injectivity for finite spaces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import core
from .core import ABS_FLOOR, DEFAULT_TOL, MAX_ORDER, SigmaSpace
from .errors import ConfigError, DegenerateBasis, DimensionExceedsCap

BATCH = 32
POOL = 200


@dataclass(frozen=True)
class Chart:
    basis: np.ndarray
    g_cov: np.ndarray
    g_contra: np.ndarray
    signature: tuple[int, int]

    @property
    def order(self) -> int:
        return self.g_cov.shape[0]


@dataclass(frozen=True)
class DimensionResult:
    dimension: int
    basis: np.ndarray
    max_residual: float  # largest escape residual left at the returned order
    escaped: bool = False  # true only for non-strict runs stopped at the cap


@dataclass
class EuclidReport:
    dimension_found: int
    cond1_pass: bool
    cond1_max_residual: float
    cond2_pass: bool
    cond2_max_residual: float
    cond3_pass: bool | None
    cond3_max_residual: float | None
    injective: bool
    signature: tuple[int, int]
    witness: list
    tol: float
    counts: dict = field(default_factory=dict)
    worst_pair: list | None = None

    @property
    def passed(self) -> bool:
        return self.cond1_pass and self.cond2_pass and self.cond3_pass is not False

    def as_dict(self) -> dict:
        def flag(v):
            return "not-assessable" if v is None else ("pass" if v else "fail")

        return {
            "dimension_found": self.dimension_found,
            "cond1": flag(self.cond1_pass),
            "cond2": flag(self.cond2_pass),
            "cond3": flag(self.cond3_pass),
            "cond1_max_residual": self.cond1_max_residual,
            "cond2_max_residual": self.cond2_max_residual,
            "cond3_max_residual": self.cond3_max_residual,
            "injective": self.injective,
            "signature": list(self.signature),
            "tol": self.tol,
            "counts": dict(self.counts),
            "witness_basis": self.witness,
            "worst_pair": self.worst_pair,
        }


def _draw(space: SigmaSpace, sampler, rng: np.random.Generator, count: int) -> np.ndarray:
    sampler = sampler or space.sampler
    if sampler is None:
        raise ConfigError(f"space {space!r} has no point sampler")
    pts = sampler(rng, count)
    return core._point_list(space, pts)


def _escape_residuals(space: SigmaSpace, basis, pool) -> np.ndarray:
    if len(basis) == 1:
        s = space.along(basis[0], pool)
        return 2.0 * s / np.maximum(1.0, 2.0 * np.abs(s))
    F_next, Fn, scale = core.extension_determinants(space, basis, pool)
    return F_next / (abs(Fn) * scale)


def detect_dimension(
    space: SigmaSpace,
    sampler: Callable | None = None,
    max_dim: int = MAX_ORDER,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    *,
    pool_size: int = POOL,
    batch: int = BATCH,
    strict: bool = True,
) -> DimensionResult:
    """Smallest n such that no sampled point leaves the n-th order tube of a greedy basis.

    With ``strict=False`` the search stops at ``max_dim`` and reports the
    remaining escape instead of raising DimensionExceedsCap.
    """
    if not 0 <= max_dim <= MAX_ORDER:
        raise ConfigError(f"max_dim must lie in 0..{MAX_ORDER}")
    rng = np.random.default_rng(seed)
    pool = _draw(space, sampler, rng, pool_size)
    basis = pool[:1]
    eps = max(tol, ABS_FLOOR)
    while True:
        res = _escape_residuals(space, basis, pool)
        worst = float(np.max(np.abs(res))) if len(res) else 0.0
        escaping = np.flatnonzero(np.abs(res) > eps)
        k = len(basis) - 1
        if escaping.size == 0:
            return DimensionResult(k, basis, worst)
        if k >= max_dim:
            if strict:
                raise DimensionExceedsCap(max_dim, worst)
            return DimensionResult(k, basis, worst, escaped=True)
        candidates = escaping[:batch]
        pick = candidates[int(np.argmax(np.abs(res[candidates])))]
        basis = np.concatenate([basis, pool[pick : pick + 1]])


def build_chart(space: SigmaSpace, basis: Sequence, tol: float = DEFAULT_TOL) -> Chart:
    pts = core._point_list(space, basis)
    g = core.gamma_matrix(space, pts)
    n = g.shape[0]
    s = max(1.0, float(np.max(np.abs(np.diag(g)))))
    det = float(np.linalg.det(g))
    if abs(det) <= max(tol, ABS_FLOOR) * s**n:
        raise DegenerateBasis(f"F_{n} = {det!r} vanishes within tolerance")
    g_contra = np.linalg.inv(g)
    ev = np.linalg.eigvalsh(g)
    g.setflags(write=False)
    g_contra.setflags(write=False)
    return Chart(pts, g, g_contra, (int(np.sum(ev > 0)), int(np.sum(ev < 0))))


def covariant_coordinates(space: SigmaSpace, chart: Chart, p) -> np.ndarray:
    """x_i(P) = Gamma(P0, Pi, P); accepts one point or an array of points."""
    single = np.ndim(p) == (0 if space.is_finite else 1)
    P = core._point_list(space, [p] if single else p)
    b = chart.basis
    s0p = space.along(b[0], P)  # sigma(P0, P)
    s0i = space.along(b[0], b[1:])  # sigma(P0, Pi)
    sip = space.pairwise(b[1:], P)  # sigma(Pi, P)
    x = (s0i[:, None] + s0p[None, :] - sip).T
    return x[0] if single else x


def reconstruct_sigma(chart: Chart, x, y) -> np.ndarray | float:
    """1/2 g^{ik} (x_i - y_i)(x_k - y_k)."""
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    out = 0.5 * np.einsum("...i,ij,...j->...", d, chart.g_contra, d)
    return float(out) if np.ndim(out) == 0 else out


def _pair_samples(space, sampler, rng, n_pairs):
    if space.is_finite:
        labels = np.arange(space.size)
        i, j = np.triu_indices(space.size, k=1)
        return labels[i], labels[j]
    pts = _draw(space, sampler, rng, 2 * n_pairs)
    return pts[:n_pairs], pts[n_pairs:]


def _coordinate_inverse(space: SigmaSpace, chart: Chart, targets: np.ndarray, tol: float):
    """Solve x(P) = xi for each target by Gauss-Newton from an affine start.

    Returns (points, relative round-trip residuals, jacobian rank); the
    residual is NaN where the solution left the domain."""
    dim = space.dim
    p0 = chart.basis[0].astype(float)
    h = 1e-4 * max(1.0, float(np.max(np.abs(p0))))
    x0 = covariant_coordinates(space, chart, p0)
    J = (covariant_coordinates(space, chart, p0 + h * np.eye(dim)) - x0).T / h  # (n, dim)
    rank = int(np.linalg.matrix_rank(J, tol=1e-8 * max(1.0, float(np.max(np.abs(J))))))
    pinv = np.linalg.pinv(J)
    P = p0 + (targets - x0) @ pinv.T
    scale = np.maximum(1.0, np.max(np.abs(targets), axis=1))
    for _ in range(20):
        if not np.all(space.contains(P)):
            break
        err = covariant_coordinates(space, chart, P) - targets
        rel = np.max(np.abs(err), axis=1) / scale
        if np.all(rel <= 0.01 * tol):
            break
        P = P - err @ pinv.T
    inside = space.contains(P)
    rel = np.full(len(P), np.nan)
    if np.any(inside):
        err = covariant_coordinates(space, chart, P[inside]) - targets[inside]
        rel[inside] = np.max(np.abs(err), axis=1) / scale[inside]
    return P, rel, rank


def _default_grid(coords: np.ndarray, per_axis: int) -> np.ndarray:
    lo = coords.min(axis=0)
    hi = coords.max(axis=0)
    axes = [np.linspace(a, b, per_axis) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def check_conditions(
    space: SigmaSpace,
    chart: Chart,
    sample_pairs=None,
    coord_grid=None,
    tol: float = DEFAULT_TOL,
    *,
    seed: int = 0,
    n_pairs: int = 500,
    sampler: Callable | None = None,
    grid_per_axis: int = 5,
) -> EuclidReport:
    """Evaluate conditions I-III against a chart; failures are report entries, not errors."""
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    if sample_pairs is None:
        P, Q = _pair_samples(space, sampler, rng, n_pairs)
    else:
        P = core._point_list(space, [a for a, _ in sample_pairs])
        Q = core._point_list(space, [b for _, b in sample_pairs])
    eps = max(tol, ABS_FLOOR)
    n = chart.order

    # Condition I
    pts = np.concatenate([P, Q])
    F_next, Fn, scale = core.extension_determinants(space, chart.basis, pts)
    r1 = np.abs(F_next) / (abs(Fn) * scale)
    c1 = float(np.max(r1)) if len(r1) else 0.0

    # Condition II
    xp = covariant_coordinates(space, chart, P)
    xq = covariant_coordinates(space, chart, Q)
    direct = np.asarray(space.sigma(P, Q), dtype=float)
    rec = reconstruct_sigma(chart, xp, xq)
    r2 = np.abs(direct - rec) / np.maximum(1.0, 2.0 * np.abs(direct))
    c2 = float(np.max(r2)) if len(r2) else 0.0
    worst = int(np.argmax(r2)) if len(r2) else None

    # Condition III
    coords = np.concatenate([xp, xq])
    if len(coords) > 1:
        diff = coords[:, None, :] - coords[None, :, :]
        dist = np.max(np.abs(diff), axis=-1)
        same_pt = np.array(
            [[space.same_point(a, b) for b in pts] for a in pts]
        ) if space.is_finite else np.all(pts[:, None, :] == pts[None, :, :], axis=-1)
        cscale = max(1.0, float(np.max(np.abs(coords))))
        # rounding-level separation only: genuinely close samples must not count as collisions
        injective = bool(np.all(dist[~same_pt] > ABS_FLOOR * cscale))
    else:
        injective = True
    unreached = 0
    if space.is_finite:
        c3_pass, c3 = None, None
    else:
        grid = np.asarray(coord_grid, dtype=float) if coord_grid is not None else _default_grid(coords, grid_per_axis)
        _, rel, rank = _coordinate_inverse(space, chart, grid, tol)
        reached = ~np.isnan(rel)
        unreached = int(np.sum(~reached))
        c3 = float(np.max(rel[reached])) if np.any(reached) else None
        c3_pass = bool(
            rank == n and n == space.dim and unreached == 0 and c3 is not None and c3 <= eps and injective
        )

    def key(p):
        return int(p) if space.is_finite else np.asarray(p).tolist()

    return EuclidReport(
        dimension_found=n,
        cond1_pass=bool(c1 <= eps),
        cond1_max_residual=c1,
        cond2_pass=bool(c2 <= eps),
        cond2_max_residual=c2,
        cond3_pass=c3_pass,
        cond3_max_residual=c3,
        injective=injective,
        signature=chart.signature,
        witness=[key(b) for b in chart.basis],
        tol=tol,
        counts={"points": int(len(pts)), "pairs": int(len(P)), "cond3_unreached": unreached},
        worst_pair=None if worst is None else [key(P[worst]), key(Q[worst])],
    )


def euclid_report(
    space: SigmaSpace,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    *,
    n_pairs: int = 500,
    max_dim: int | None = None,
    sampler: Callable | None = None,
) -> EuclidReport:
    """Detect a basis (non-strictly, up to the ambient dimension) and run all three conditions."""
    if max_dim is None:
        max_dim = min(MAX_ORDER, space.size - 1 if space.is_finite else space.dim)
    found = detect_dimension(space, sampler, max_dim, tol, seed, strict=False)
    if found.dimension == 0:
        raise DegenerateBasis("all sampled points coincide; no chart of positive order exists")
    chart = build_chart(space, found.basis, tol)
    return check_conditions(space, chart, None, None, tol, seed=seed, n_pairs=n_pairs, sampler=sampler)
