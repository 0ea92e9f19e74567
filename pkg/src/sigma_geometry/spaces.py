"""Closed-form world functions and the space factory.

Flat kinds (euclidean, constant_metric, pseudo_euclidean) use the rectilinear
form sigma = 1/2 g_ik dx^i dx^k.  The unit-sphere kind uses the great-circle
distance, and the punctured plane uses the shortest path around a circular
hole (straight segment when unobstructed, otherwise tangent-arc-tangent).
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .core import ABS_FLOOR, FiniteSigmaSpace, SigmaSpace
from .errors import ConfigError, DegenerateGeodesicWarning, PointInsideHole
from .riemann.metric import (
    MetricField,
    constant_metric,
    punctured_plane_metric,
    sphere_metric,
)

KINDS = (
    "euclidean",
    "constant_metric",
    "pseudo_euclidean",
    "sphere",
    "punctured_plane",
    "finite",
    "riemannian_expr",
)


@dataclass
class SpaceSpec:
    kind: str
    dim: int | None = None
    params: dict[str, Any] = field(default_factory=dict)

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"unknown space kind {self.kind!r}; expected one of {KINDS}")
        if self.kind != "finite":
            if not isinstance(self.dim, int) or isinstance(self.dim, bool) or self.dim < 1:
                raise ConfigError(f"{self.kind} needs a positive integer dim, got {self.dim!r}")
        if self.kind in ("sphere", "punctured_plane") and self.dim != 2:
            raise ConfigError(f"{self.kind} is two-dimensional")
        if self.kind == "constant_metric":
            g = np.asarray(self.params.get("g"), dtype=float)
            if g.shape != (self.dim, self.dim):
                raise ConfigError(f"constant_metric g must be {self.dim}x{self.dim}")
            if not np.array_equal(g, g.T):
                raise ConfigError("constant_metric g must be symmetric")
            if np.linalg.det(g) == 0.0:
                raise ConfigError("constant_metric g must have a nonzero determinant")
        if self.kind == "sphere" and not float(self.params.get("R", 1.0)) > 0:
            raise ConfigError("sphere radius R must be positive")
        if self.kind == "punctured_plane" and not float(self.params.get("a", 1.0)) > 0:
            raise ConfigError("hole radius a must be positive")
        if self.kind == "finite" and "table" not in self.params:
            raise ConfigError("finite space needs a sigma table")
        if self.kind == "riemannian_expr" and "g" not in self.params:
            raise ConfigError("riemannian_expr needs metric component expressions 'g'")


class IntervalKind(enum.Enum):
    TIMELIKE = "timelike"
    SPACELIKE = "spacelike"
    NULL = "null"

    def __str__(self) -> str:
        return self.value


def quadratic_sigma(G: np.ndarray):
    """sigma(x, y) = 1/2 (x - y)^T G (x - y), broadcasting over leading axes."""
    G = np.array(G, dtype=float)
    diagonal = np.array_equal(G, np.diag(np.diag(G)))
    w = np.diag(G).copy()

    def func(x, y):
        d = np.asarray(x) - np.asarray(y)
        if diagonal:
            return 0.5 * np.einsum("...i,i,...i->...", d, w, d)
        return 0.5 * np.einsum("...i,ij,...j->...", d, G, d)

    return func


def _signature(G: np.ndarray) -> tuple[int, int]:
    ev = np.linalg.eigvalsh(np.asarray(G, dtype=float))
    return int(np.sum(ev > 0)), int(np.sum(ev < 0))


def _unit_vectors(x: np.ndarray) -> np.ndarray:
    th, ph = x[..., 0], x[..., 1]
    s = np.sin(th)
    return np.stack([s * np.cos(ph), s * np.sin(ph), np.cos(th)], axis=-1)


def sphere_angle(x, y) -> np.ndarray:
    """Central angle between polar points (theta, phi); stable near 0 and pi."""
    u = _unit_vectors(np.asarray(x, dtype=float))
    v = _unit_vectors(np.asarray(y, dtype=float))
    u, v = np.broadcast_arrays(u, v)
    cross = np.linalg.norm(np.cross(u, v), axis=-1)
    dot = np.einsum("...i,...i->...", u, v)
    return np.arctan2(cross, dot)


def sphere_sigma_func(radius: float = 1.0, antipodal_tol: float = 1e-9):
    def func(x, y):
        d = sphere_angle(x, y)
        if np.any(np.pi - d <= antipodal_tol):
            warnings.warn(
                "antipodal pair: infinitely many geodesics, sigma = (pi R)^2 / 2",
                DegenerateGeodesicWarning,
                stacklevel=3,
            )
        return 0.5 * (radius * d) ** 2

    return func


def punctured_plane_sigma_array(a: float, x, y) -> np.ndarray:
    """Vectorised world function of the plane with the open disk |x| < a removed."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    r1 = np.linalg.norm(x, axis=-1)
    r2 = np.linalg.norm(y, axis=-1)
    inside = (r1 < a * (1 - 1e-12)) | (r2 < a * (1 - 1e-12))
    if np.any(inside):
        bad = np.argwhere(np.atleast_1d(inside))[0]
        raise PointInsideHole(f"point inside the hole of radius {a} (index {bad.tolist()})")
    d = y - x
    dd = np.einsum("...i,...i->...", d, d)
    shadow = shadowed(a, x, y)
    euclid = 0.5 * dd
    if not np.any(shadow):
        return euclid
    r1c = np.maximum(r1, a)
    r2c = np.maximum(r2, a)
    cross = x[..., 0] * y[..., 1] - x[..., 1] * y[..., 0]
    dot = np.einsum("...i,...i->...", x, y)
    theta = np.arctan2(np.abs(cross), dot)
    phi = theta - np.arccos(np.clip(a / r1c, -1, 1)) - np.arccos(np.clip(a / r2c, -1, 1))
    length = np.sqrt(r1c**2 - a * a) + np.sqrt(r2c**2 - a * a) + a * np.maximum(phi, 0.0)
    return np.where(shadow, 0.5 * length**2, euclid)


def punctured_plane_sigma(a: float, x, x2) -> float:
    """World function of the punctured plane for a single pair."""
    if a <= 0:
        raise ValueError("hole radius must be positive")
    return float(punctured_plane_sigma_array(a, x, x2))


def shadowed(a: float, x, y) -> np.ndarray:
    """True where the segment [x, y] meets the open disk of radius a."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    d = y - x
    dd = np.einsum("...i,...i->...", d, d)
    safe = np.where(dd > 0, dd, 1.0)
    t = np.clip(-np.einsum("...i,...i->...", x, d) / safe, 0.0, 1.0)
    return (np.linalg.norm(x + t[..., None] * d, axis=-1) < a) & (dd > 0)


def _box_sampler(dim: int, lo: float, hi: float):
    def sample(rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(lo, hi, size=(count, dim))

    return sample


def _sphere_sampler(margin: float = 0.3):
    def sample(rng, count):
        th = rng.uniform(margin, np.pi - margin, size=count)
        ph = rng.uniform(0.0, 2 * np.pi, size=count)
        return np.stack([th, ph], axis=-1)

    return sample


def _punctured_sampler(a: float, half_width: float):
    def sample(rng, count):
        out = np.empty((0, 2))
        while len(out) < count:
            batch = rng.uniform(-half_width, half_width, size=(2 * count, 2))
            keep = np.einsum("ij,ij->i", batch, batch) >= a * a
            out = np.vstack([out, batch[keep]])
        return out[:count]

    return sample


def make_space(spec: SpaceSpec) -> SigmaSpace:
    spec.validate()
    kind, dim, params = spec.kind, spec.dim, spec.params
    box = float(params.get("box", 1.0))
    if kind == "euclidean":
        G = np.eye(dim)
        return SigmaSpace(
            quadratic_sigma(G), dim, kind=kind, signature=(dim, 0),
            sampler=_box_sampler(dim, -box, box), metric_field=constant_metric(G, "euclidean"),
            flat=True,
        )
    if kind == "pseudo_euclidean":
        G = np.diag([1.0] + [-1.0] * (dim - 1))
        return SigmaSpace(
            quadratic_sigma(G), dim, kind=kind, signature=_signature(G),
            sampler=_box_sampler(dim, -box, box), metric_field=constant_metric(G, kind),
            flat=True,
        )
    if kind == "constant_metric":
        G = np.asarray(params["g"], dtype=float)
        return SigmaSpace(
            quadratic_sigma(G), dim, kind=kind, signature=_signature(G),
            sampler=_box_sampler(dim, -box, box), metric_field=constant_metric(G),
            flat=True,
        )
    if kind == "sphere":
        R = float(params.get("R", 1.0))
        mf = sphere_metric(R)
        return SigmaSpace(
            sphere_sigma_func(R), 2, kind=kind, signature=(2, 0),
            sampler=_sphere_sampler(float(params.get("margin", 0.3))),
            domain=mf.domain, metric_field=mf,
        )
    if kind == "punctured_plane":
        a = float(params.get("a", 1.0))
        half = float(params.get("box", 3.0 * a))

        def func(x, y, a=a):
            return punctured_plane_sigma_array(a, x, y)

        def domain(x, a=a):
            return np.einsum("...i,...i->...", x, x) >= a * a * (1 - 1e-12)

        return SigmaSpace(
            func, 2, kind=kind, signature=(2, 0), sampler=_punctured_sampler(a, half),
            domain=domain, metric_field=punctured_plane_metric(a),
        )
    if kind == "finite":
        return FiniteSigmaSpace(params["table"])
    # riemannian_expr
    from .riemann.geodesic import SolverOptions, riemannian_space
    from .riemann.exprmetric import expression_metric

    mf = expression_metric(params["g"], dim)
    opts = SolverOptions(**params.get("solver", {}))
    space = riemannian_space(mf, opts)
    space.sampler = _box_sampler(dim, -box, box)
    return space


def space_from_metric(metric: MetricField, **kw) -> SigmaSpace:
    """Riemannian sigma-space for an arbitrary metric field (numeric geodesics)."""
    from .riemann.geodesic import SolverOptions, riemannian_space

    return riemannian_space(metric, SolverOptions(**kw))


def _interval_scale(space: SigmaSpace, p, q) -> float:
    if space.is_finite:
        return 1.0
    d = np.asarray(space.as_points(p)) - np.asarray(space.as_points(q))
    return max(1.0, 0.5 * float(d @ d))


def classify_interval(space: SigmaSpace, p, q, tol: float = 1e-9) -> IntervalKind:
    """Sign classification of sigma(p, q): timelike > 0, spacelike < 0, null ~ 0."""
    s = float(space.sigma(p, q))
    band = max(tol, ABS_FLOOR) * _interval_scale(space, p, q)
    if s > band:
        return IntervalKind.TIMELIKE
    if s < -band:
        return IntervalKind.SPACELIKE
    return IntervalKind.NULL


def is_indefinite(space: SigmaSpace) -> bool:
    sig = space.signature
    return sig is not None and sig[0] > 0 and sig[1] > 0
