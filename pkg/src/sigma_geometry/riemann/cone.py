"""Collinearity cone: directions at x collinear to a given direction at x'.

With u_i = -sigma_{il'} dx'^l and c = g_{l's'} dx'^l dx'^s the collinearity
condition for a direction dx at x reads

    dx^T M dx = 0,    M = u u^T - c g(x).

The zero set is found by scanning unit directions, refining sign changes by
bisection along great circles and polishing near-double roots by local
minimisation of the squared residual.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import cKDTree

from ..core import SigmaSpace
from .tangent import DEFAULT_FD_STEP, tangent_metric

CLUSTER_RADIUS = 1e-2


@dataclass(frozen=True)
class ConeSolution:
    direction: np.ndarray
    residual: float


@dataclass(frozen=True)
class ConeResult:
    x: np.ndarray
    x2: np.ndarray
    u: np.ndarray  # given direction at x'
    u_lower: np.ndarray  # u_i at x
    u_dir: np.ndarray  # unit u^i = G^{ik} u_k at x
    form: np.ndarray  # M
    solutions: tuple[ConeSolution, ...]
    degenerate: bool
    max_angle: float  # largest angle between a solution and the line of u_dir

    def as_dict(self) -> dict:
        return {
            "x": self.x.tolist(),
            "x2": self.x2.tolist(),
            "u": self.u.tolist(),
            "u_at_x": self.u_dir.tolist(),
            "degenerate": self.degenerate,
            "max_angle": self.max_angle,
            "solutions": [
                {"direction": s.direction.tolist(), "residual": s.residual} for s in self.solutions
            ],
        }


def direction_net(dim: int, resolution: int, seed: int = 0) -> np.ndarray:
    """Unit directions covering the sphere S^{dim-1}."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        t = 2.0 * np.pi * np.arange(resolution) / resolution
        return np.stack([np.cos(t), np.sin(t)], axis=-1)
    if dim == 3:
        i = np.arange(resolution) + 0.5
        z = 1.0 - 2.0 * i / resolution
        r = np.sqrt(1.0 - z * z)
        phi = np.pi * (1.0 + 5.0**0.5) * i
        return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)
    v = np.random.default_rng(seed).standard_normal((resolution, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _slerp_root(f, a: np.ndarray, b: np.ndarray, fa: float, iters: int = 60) -> np.ndarray:
    for _ in range(iters):
        m = a + b
        m /= np.linalg.norm(m)
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    m = a + b
    return m / np.linalg.norm(m)


def _polish(f, v0: np.ndarray) -> np.ndarray:
    res = minimize(
        lambda w: f(w / np.linalg.norm(w)) ** 2,
        v0,
        method="Nelder-Mead",
        options={"xatol": 1e-12, "fatol": 1e-30, "maxiter": 4000},
    )
    w = res.x / np.linalg.norm(res.x)
    return w


def _line_angle(a: np.ndarray, b: np.ndarray) -> float:
    c = abs(float(a @ b)) / (np.linalg.norm(a) * np.linalg.norm(b))
    return float(np.arccos(min(1.0, c)))


def collinearity_cone(
    space: SigmaSpace,
    metric,
    x,
    x2,
    u,
    resolution: int | None = None,
    tol: float = 1e-6,
    fd_step: float = DEFAULT_FD_STEP,
    cluster: float = CLUSTER_RADIUS,
    seed: int = 0,
) -> ConeResult:
    u = np.asarray(u, dtype=float).reshape(-1)
    if not np.any(u):
        raise ValueError("direction u must be nonzero")
    td = tangent_metric(space, metric, x, x2, fd_step)
    d = len(td.x)
    if u.shape != (d,):
        raise ValueError(f"direction u must have {d} components")
    u = u / np.linalg.norm(u)
    u_low = -td.mixed @ u
    c = float(u @ td.g_x2 @ u)
    M = np.outer(u_low, u_low) - c * td.g_x
    M = 0.5 * (M + M.T)
    scale = max(float(np.linalg.norm(u_low)) ** 2 + abs(c) * float(np.linalg.norm(td.g_x)), 1e-300)
    Mn = M / scale
    u_up = np.linalg.solve(td.G, u_low)
    u_dir = u_up / np.linalg.norm(u_up)

    def f(v):
        return float(v @ Mn @ v)

    if resolution is None:
        resolution = {1: 2, 2: 3600, 3: 10000}.get(d, 20000)
    net = direction_net(d, resolution, seed)
    r = np.einsum("ni,ij,nj->n", net, Mn, net)

    found: list[np.ndarray] = []
    if d == 1:
        if abs(r[0]) <= tol:
            found.append(net[0])
    else:
        k = min(2 * d + 2, len(net) - 1)
        _, nbr = cKDTree(net).query(net, k=k + 1)
        nbr = nbr[:, 1:]
        for i in range(len(net)):
            for j in nbr[i]:
                if j > i and r[i] * r[j] < 0:
                    found.append(_slerp_root(f, net[i], net[j], r[i]))
            if r[i] == 0.0:
                found.append(net[i])
        # near-double roots where the form touches zero without changing sign
        spacing = np.median(np.linalg.norm(net[nbr[:, 0]] - net, axis=1))
        near = 4.0 * spacing**2 * max(float(np.max(np.abs(np.linalg.eigvalsh(Mn)))), 1e-300)
        absr = np.abs(r)
        is_min = np.all(absr[:, None] <= absr[nbr], axis=1) & (absr <= near)
        for i in np.flatnonzero(is_min):
            found.append(_polish(f, net[i]))

    sols: list[ConeSolution] = []
    for v in found:
        rv = f(v)
        if abs(rv) > tol:
            continue
        if any(_line_angle(v, s.direction) < 0.5 * cluster for s in sols):
            continue
        # canonical sign: first non-negligible component positive
        lead = v[np.flatnonzero(np.abs(v) > 1e-12)[0]]
        sols.append(ConeSolution(v if lead > 0 else -v, rv))
    angles = [_line_angle(s.direction, u_dir) for s in sols]
    max_angle = max(angles) if angles else 0.0
    return ConeResult(
        td.x, td.x2, u, u_low, u_dir, M, tuple(sols), bool(max_angle <= cluster), max_angle
    )
