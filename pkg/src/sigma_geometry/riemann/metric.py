"""Metric tensor fields g_ik(x) and their Christoffel symbols."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import SingularMetric

MetricFunc = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class MetricField:
    """A symmetric matrix-valued function of coordinates.

    ``g`` maps an array of shape ``(..., dim)`` to ``(..., dim, dim)``.
    ``domain`` (optional) returns a boolean mask of admissible coordinates;
    ``hole_radius`` marks the punctured plane, whose domain is |x| >= a.
    """

    dim: int
    g: MetricFunc
    source: str = "builtin"
    name: str = "custom"
    domain: Callable[[np.ndarray], np.ndarray] | None = None
    hole_radius: float | None = None
    constant: bool = False
    params: dict = field(default_factory=dict)

    def __call__(self, x) -> np.ndarray:
        return self.g(np.asarray(x, dtype=float))

    def inside(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        ok = np.all(np.isfinite(x), axis=-1)
        if self.domain is not None:
            ok &= np.asarray(self.domain(x), dtype=bool)
        if self.hole_radius is not None:
            ok &= np.einsum("...i,...i->...", x, x) >= self.hole_radius**2 * (1 - 1e-12)
        return ok


def constant_metric(G, name: str = "constant_metric") -> MetricField:
    G = np.array(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError("metric matrix must be square")
    if not np.allclose(G, G.T, rtol=0, atol=0):
        raise ValueError("metric matrix must be symmetric")
    if abs(np.linalg.det(G)) == 0.0:
        raise SingularMetric("constant metric has zero determinant")
    G.setflags(write=False)

    def g(x):
        return np.broadcast_to(G, np.shape(x)[:-1] + G.shape).copy()

    return MetricField(G.shape[0], g, name=name, constant=True, params={"g": G.tolist()})


def sphere_metric(radius: float = 1.0) -> MetricField:
    """Round 2-sphere in polar coordinates (theta, phi): R^2 diag(1, sin^2 theta)."""
    if radius <= 0:
        raise ValueError("sphere radius must be positive")
    R2 = radius * radius

    def g(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (2, 2))
        out[..., 0, 0] = R2
        out[..., 1, 1] = R2 * np.sin(x[..., 0]) ** 2
        return out

    def domain(x):
        return (x[..., 0] > 0.0) & (x[..., 0] < np.pi)

    return MetricField(2, g, name="sphere", domain=domain, params={"R": radius})


def conformal_metric(dim: int, c: float = 0.1) -> MetricField:
    """g = (1 + c |x|^2) I."""

    def g(x):
        x = np.asarray(x, dtype=float)
        f = 1.0 + c * np.einsum("...i,...i->...", x, x)
        return f[..., None, None] * np.eye(dim)

    return MetricField(dim, g, name="conformal", params={"c": c})


def punctured_plane_metric(a: float = 1.0) -> MetricField:
    if a <= 0:
        raise ValueError("hole radius must be positive")

    def g(x):
        return np.broadcast_to(np.eye(2), np.shape(x)[:-1] + (2, 2)).copy()

    return MetricField(2, g, name="punctured_plane", hole_radius=a, params={"a": a})


def metric_derivatives(metric: MetricField, x, h: float | None = None) -> np.ndarray:
    """Central differences dg_ij/dx^k, returned with shape (..., k, i, j)."""
    x = np.asarray(x, dtype=float)
    d = metric.dim
    if h is None:
        h = 1e-5 * max(1.0, float(np.max(np.abs(x))) if x.size else 1.0)
    steps = np.eye(d) * h
    plus = metric.g(x[..., None, :] + steps)
    minus = metric.g(x[..., None, :] - steps)
    return (plus - minus) / (2.0 * h)


def christoffel(metric: MetricField, x, h: float | None = None) -> np.ndarray:
    """gamma[i, k, l] = 1/2 g^{ij} (g_kj,l + g_lj,k - g_kl,j) at a single point."""
    x = np.asarray(x, dtype=float)
    g = metric.g(x)
    det = np.linalg.det(g)
    if not np.isfinite(det) or abs(det) <= 1e-14 * max(1.0, float(np.max(np.abs(g)))) ** metric.dim:
        raise SingularMetric(f"metric is singular at {x.tolist()}")
    ginv = np.linalg.inv(g)
    dg = metric_derivatives(metric, x, h)  # dg[l, k, j] = g_kj,l
    # lowered symbol Gamma_{j k l} = 1/2 (g_kj,l + g_lj,k - g_kl,j)
    low = 0.5 * (
        np.einsum("lkj->jkl", dg) + np.einsum("klj->jkl", dg) - np.einsum("jkl->jkl", dg)
    )
    return np.einsum("ij,jkl->ikl", ginv, low)
