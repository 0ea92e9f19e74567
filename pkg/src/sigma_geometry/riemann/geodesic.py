"""Geodesic two-point boundary value problems by discrete energy minimisation.

The path x(tau), tau in [0, 1], is represented by m+1 nodes with fixed
endpoints.  The discrete energy

    E = sum_j g(mid_j)(dx_j, dx_j) / dtau_j,   dtau_j = 1/m

is minimised over the interior nodes with a damped Newton method.  The
Hessian is assembled from finite differences of the analytic gradient; the
gradient couples only neighbouring nodes, so three colour classes per
coordinate recover the full block-tridiagonal matrix.

For the punctured plane a logarithmic barrier keeps the nodes outside the
hole and is driven to zero by continuation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import SigmaSpace
from ..errors import ChartBoundary, ConfigError, DomainError, NonConvergence, PointInsideHole
from .metric import MetricField, metric_derivatives


@dataclass(frozen=True)
class SolverOptions:
    nodes: int = 64
    gtol: float = 1e-9
    max_iter: int = 400
    richardson: bool = True

    def __post_init__(self):
        if int(self.nodes) < 2:
            raise ConfigError("a geodesic needs at least 2 segments")
        if not self.gtol > 0:
            raise ConfigError("gtol must be positive")
        if int(self.max_iter) < 1:
            raise ConfigError("max_iter must be at least 1")


@dataclass(frozen=True)
class GeodesicPath:
    nodes: np.ndarray  # (m+1, dim)
    params: np.ndarray  # (m+1,)
    length: float
    converged: bool
    iterations: int
    energy: float = float("nan")

    @property
    def sigma(self) -> float:
        return 0.5 * self.length**2


def discrete_length(metric: MetricField, X: np.ndarray) -> float:
    D = np.diff(X, axis=0)
    G = metric.g(0.5 * (X[1:] + X[:-1]))
    q = np.einsum("nij,ni,nj->n", G, D, D)
    return float(np.sum(np.sqrt(np.maximum(q, 0.0))))


class _Problem:
    def __init__(self, metric: MetricField, a: np.ndarray, b: np.ndarray, m: int):
        self.metric = metric
        self.a = a
        self.b = b
        self.m = m
        self.d = a.size
        self.mu = 0.0

    def nodes(self, interior: np.ndarray) -> np.ndarray:
        return np.vstack([self.a, interior.reshape(self.m - 1, self.d), self.b])

    def energy(self, interior: np.ndarray) -> float:
        X = self.nodes(interior)
        D = np.diff(X, axis=0)
        G = self.metric.g(0.5 * (X[1:] + X[:-1]))
        return float(self.m * np.einsum("nij,ni,nj->", G, D, D))

    def objective(self, interior: np.ndarray) -> float:
        Y = interior.reshape(self.m - 1, self.d)
        if not np.all(self.metric.inside(Y)):
            return math.inf
        E = self.energy(interior)
        if self.mu:
            s = np.einsum("ni,ni->n", Y, Y) - self.metric.hole_radius**2
            if np.any(s <= 0):
                return math.inf
            E -= self.mu * float(np.sum(np.log(s)))
        return E

    def gradient(self, interior: np.ndarray) -> np.ndarray:
        X = self.nodes(interior)
        D = np.diff(X, axis=0)
        M = 0.5 * (X[1:] + X[:-1])
        G = self.metric.g(M)
        GD = np.einsum("nij,nj->ni", G, D)
        if self.metric.constant:
            q = 0.0
        else:
            dG = metric_derivatives(self.metric, M, h=1e-6 * max(1.0, float(np.max(np.abs(M)))))
            q = 0.5 * np.einsum("nkij,ni,nj->nk", dG, D, D)
        start = self.m * (q - 2.0 * GD)  # d/d(start node) of each segment term
        end = self.m * (q + 2.0 * GD)
        grad = start[1:] + end[:-1]
        if self.mu:
            Y = X[1:-1]
            s = np.einsum("ni,ni->n", Y, Y) - self.metric.hole_radius**2
            grad = grad - self.mu * 2.0 * Y / s[:, None]
        return grad.ravel()

    def hessian(self, interior: np.ndarray, g0: np.ndarray) -> np.ndarray:
        n, d = self.m - 1, self.d
        Y = interior.reshape(n, d)
        eps = 1e-6 * max(1.0, float(np.max(np.abs(Y))))
        saved_mu, self.mu = self.mu, 0.0
        base = g0 if not saved_mu else self.gradient(interior)
        H = np.zeros((n * d, n * d))
        for colour in range(3):
            idx = np.arange(colour, n, 3)
            if idx.size == 0:
                continue
            for k in range(d):
                P = Y.copy()
                P[idx, k] += eps
                dg = ((self.gradient(P.ravel()) - base) / eps).reshape(n, d)
                for j in idx:
                    lo, hi = max(j - 1, 0), min(j + 2, n)
                    H[lo * d : hi * d, j * d + k] = dg[lo:hi].ravel()
        self.mu = saved_mu
        H = 0.5 * (H + H.T)
        if self.mu:
            s = np.einsum("ni,ni->n", Y, Y) - self.metric.hole_radius**2
            for j in range(n):
                y = Y[j]
                blk = self.mu * (-2.0 * np.eye(d) / s[j] + 4.0 * np.outer(y, y) / s[j] ** 2)
                H[j * d : (j + 1) * d, j * d : (j + 1) * d] += blk
        return H


def _newton_direction(H: np.ndarray, g: np.ndarray) -> np.ndarray:
    lam = 0.0
    shift = 1e-10 * max(1.0, float(np.max(np.abs(np.diag(H)))))
    eye = np.eye(len(g))
    for _ in range(60):
        try:
            L = np.linalg.cholesky(H + lam * eye)
        except np.linalg.LinAlgError:
            lam = shift if lam == 0.0 else lam * 10.0
            continue
        return -np.linalg.solve(L.T, np.linalg.solve(L, g))
    return -g


def _minimise(prob: _Problem, x: np.ndarray, gtol: float, budget: int) -> tuple[np.ndarray, int, float, bool]:
    """Damped Newton on the current objective; returns (x, iterations, grad norm, converged)."""
    f = prob.objective(x)
    its = 0
    gnorm = math.inf
    while its < budget:
        g = prob.gradient(x)
        gnorm = float(np.max(np.abs(g)))
        if gnorm <= gtol * max(1.0, abs(f)):
            return x, its, gnorm, True
        step = _newton_direction(prob.hessian(x, g), g)
        slope = float(g @ step)
        if slope >= 0:
            step, slope = -g, -float(g @ g)
        fscale = max(1.0, abs(f))
        if -slope <= 1e-14 * fscale:
            # the Newton decrement is below what f can resolve
            return x, its, gnorm, True
        t = 1.0
        while True:
            trial = x + t * step
            ft = prob.objective(trial)
            if ft <= f + 1e-4 * t * slope:
                break
            t *= 0.5
            if t < 1e-14:
                if not math.isfinite(ft) and not math.isfinite(prob.objective(x + 1e-14 * step)):
                    raise ChartBoundary("geodesic iterates cannot stay inside the coordinate domain")
                # no further decrease possible at working precision
                return x, its, gnorm, -slope <= 1e-10 * fscale
        its += 1
        moved = float(np.max(np.abs(t * step)))
        x, f = trial, ft
        if moved <= 1e-15 * max(1.0, float(np.max(np.abs(x)))):
            g = prob.gradient(x)
            gnorm = float(np.max(np.abs(g)))
            return x, its, gnorm, gnorm <= 1e3 * gtol * max(1.0, abs(f))
    return x, its, gnorm, False


def _initial_path(prob: _Problem) -> np.ndarray:
    m, a, b = prob.m, prob.a, prob.b
    t = np.linspace(0.0, 1.0, m + 1)[1:-1, None]
    X = a + t * (b - a)
    hole = prob.metric.hole_radius
    if hole is None:
        if not np.all(prob.metric.inside(X)):
            raise ChartBoundary("the straight chord between the endpoints leaves the domain")
        return X.ravel()
    chord = b - a
    normal = np.array([-chord[1], chord[0]])
    nn = float(np.linalg.norm(normal))
    normal = np.array([0.0, 1.0]) if nn == 0.0 else normal / nn
    mid = 0.5 * (a + b)
    if float(normal @ mid) < 0 or (float(normal @ mid) == 0.0 and normal[1] < 0):
        normal = -normal  # bend away from the hole; +y breaks symmetric ties
    bump = np.sin(np.pi * t)
    c = 0.0
    step = 0.05 * hole
    for _ in range(10000):
        Y = X + c * bump * normal
        if np.all(np.einsum("ni,ni->n", Y, Y) > (1.05 * hole) ** 2):
            return Y.ravel()
        c += step
    raise ChartBoundary("could not route an initial path around the hole")


def _check_endpoint(metric: MetricField, p: np.ndarray, name: str) -> None:
    if p.shape != (metric.dim,):
        raise DomainError(f"{name} must have {metric.dim} coordinates, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise DomainError(f"{name} coordinates must be finite")
    if metric.hole_radius is not None and float(p @ p) < metric.hole_radius**2 * (1 - 1e-12):
        raise PointInsideHole(f"{name} lies inside the hole of radius {metric.hole_radius}")
    if not bool(metric.inside(p)):
        raise ChartBoundary(f"{name} = {p.tolist()} lies outside the coordinate domain")
    ev = np.linalg.eigvalsh(metric.g(p))
    if not np.all(ev > 0):
        raise ConfigError("the geodesic solver needs a positive-definite metric")


def geodesic_between(metric: MetricField, x, x2, options: SolverOptions | None = None, *, nodes: int | None = None) -> GeodesicPath:
    opts = options or SolverOptions()
    m = int(nodes or opts.nodes)
    a = np.asarray(x, dtype=float).reshape(-1)
    b = np.asarray(x2, dtype=float).reshape(-1)
    _check_endpoint(metric, a, "x")
    _check_endpoint(metric, b, "x2")
    params = np.linspace(0.0, 1.0, m + 1)
    if np.array_equal(a, b):
        X = np.repeat(a[None, :], m + 1, axis=0)
        return GeodesicPath(X, params, 0.0, True, 0, 0.0)
    prob = _Problem(metric, a, b, m)
    y = _initial_path(prob)
    budget = int(opts.max_iter)
    total = 0
    if metric.hole_radius is not None:
        converged = False
        gnorm = math.inf
        for mu in 10.0 ** -np.arange(1, 14):
            prob.mu = float(mu)
            y, its, gnorm, converged = _minimise(prob, y, opts.gtol, budget - total)
            total += its
            if total >= budget:
                break
        prob.mu = 0.0
    else:
        y, total, gnorm, converged = _minimise(prob, y, opts.gtol, budget)
    if not converged:
        raise NonConvergence(
            f"geodesic solver stopped after {total} iterations (max |grad| = {gnorm:.3e})",
            iterations=total,
            grad_norm=gnorm,
        )
    X = prob.nodes(y)
    return GeodesicPath(X, params, discrete_length(metric, X), True, total, prob.energy(y))


def geodesic_length(metric: MetricField, x, x2, options: SolverOptions | None = None) -> float:
    """Geodesic length, Richardson-extrapolated from m and 2m nodes unless disabled."""
    opts = options or SolverOptions()
    coarse = geodesic_between(metric, x, x2, opts)
    if not opts.richardson or coarse.length == 0.0:
        return coarse.length
    fine = geodesic_between(metric, x, x2, opts, nodes=2 * opts.nodes)
    return (4.0 * fine.length - coarse.length) / 3.0


def sigma_riemannian(metric: MetricField, x, x2, options: SolverOptions | None = None) -> float:
    return 0.5 * geodesic_length(metric, x, x2, options) ** 2


def riemannian_space(metric: MetricField, options: SolverOptions | None = None, kind: str = "riemannian_expr") -> SigmaSpace:
    """A sigma-space whose world function is computed by solving geodesics."""
    opts = options or SolverOptions()

    def func(p, q):
        p, q = np.broadcast_arrays(np.asarray(p, dtype=float), np.asarray(q, dtype=float))
        lead = p.shape[:-1]
        P = p.reshape(-1, metric.dim)
        Q = q.reshape(-1, metric.dim)
        out = np.empty(len(P))
        for i, (u, v) in enumerate(zip(P, Q)):
            # solve in a canonical order so that sigma is exactly symmetric
            if tuple(v) < tuple(u):
                u, v = v, u
            out[i] = sigma_riemannian(metric, u, v, opts)
        return out.reshape(lead)

    def domain(x):
        return metric.inside(x)

    return SigmaSpace(
        func, metric.dim, kind=kind, signature=(metric.dim, 0), domain=domain, metric_field=metric
    )
