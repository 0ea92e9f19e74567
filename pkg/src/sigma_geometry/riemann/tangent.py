"""Finite-difference derivatives of the world function and tangent-space tensors.

Index conventions: unprimed indices refer to the first argument x, primed ones
to the second argument x'.  ``mixed[i, k]`` is sigma_{ik'}, the derivative in
x^i and x'^k.  The inverse sigma^{ik'} satisfies sigma^{ik'} sigma_{lk'} =
delta^i_l, i.e. it is the inverse transpose of ``mixed``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import SigmaSpace
from ..errors import SingularMixed

DEFAULT_FD_STEP = 1e-3


@dataclass(frozen=True)
class TangentData:
    x: np.ndarray
    x2: np.ndarray
    sigma_value: float
    grad_x: np.ndarray  # sigma_i
    grad_x2: np.ndarray  # sigma_{i'}
    mixed: np.ndarray  # sigma_{ik'}
    fd_step: float
    G: np.ndarray | None = None
    Delta: np.ndarray | None = None
    g_x: np.ndarray | None = None
    g_x2: np.ndarray | None = None
    transport: np.ndarray | None = None  # -sigma_{il'} g^{l's'}
    extras: dict = field(default_factory=dict)

    @property
    def mixed_inverse(self) -> np.ndarray:
        """sigma^{ik'} stored as [i, k]."""
        return np.linalg.inv(self.mixed).T


class _Batch:
    """Collects (p, q) evaluation requests and resolves them in one call."""

    def __init__(self, space: SigmaSpace):
        self.space = space
        self.ps: list[np.ndarray] = []
        self.qs: list[np.ndarray] = []

    def add(self, p, q) -> int:
        self.ps.append(np.asarray(p, dtype=float))
        self.qs.append(np.asarray(q, dtype=float))
        return len(self.ps) - 1

    def run(self) -> np.ndarray:
        return np.asarray(self.space.sigma(np.array(self.ps), np.array(self.qs)), dtype=float)


def _steps(x: np.ndarray, x2: np.ndarray, fd_step: float) -> tuple[float, float, float]:
    scale = max(1.0, float(np.max(np.abs(np.concatenate([x, x2])))))
    return fd_step * 1e-2 * scale, fd_step * 1e-1 * scale, fd_step * scale


def _second_x(batch: _Batch, x, x2, h, i, k):
    """Index plan for d^2 sigma / dx^i dx^k with x2 held fixed."""
    e = np.eye(len(x)) * h
    if i == k:
        return (
            [(batch.add(x + e[i], x2), 1.0), (batch.add(x, x2), -2.0), (batch.add(x - e[i], x2), 1.0)],
            h * h,
        )
    plan = [
        (batch.add(x + e[i] + e[k], x2), 1.0),
        (batch.add(x + e[i] - e[k], x2), -1.0),
        (batch.add(x - e[i] + e[k], x2), -1.0),
        (batch.add(x - e[i] - e[k], x2), 1.0),
    ]
    return plan, 4.0 * h * h


def _apply(values: np.ndarray, plan) -> float:
    terms, denom = plan
    return float(sum(c * values[j] for j, c in terms) / denom)


def _first_and_mixed(space: SigmaSpace, x, x2, fd_step):
    d = len(x)
    h1, h2, _ = _steps(x, x2, fd_step)
    e1 = np.eye(d) * h1
    e2 = np.eye(d) * h2
    b = _Batch(space)
    centre = b.add(x, x2)
    gx = [(b.add(x + e1[i], x2), b.add(x - e1[i], x2)) for i in range(d)]
    gx2 = [(b.add(x, x2 + e1[i]), b.add(x, x2 - e1[i])) for i in range(d)]
    mixed = [
        [
            (
                b.add(x + e2[i], x2 + e2[k]),
                b.add(x + e2[i], x2 - e2[k]),
                b.add(x - e2[i], x2 + e2[k]),
                b.add(x - e2[i], x2 - e2[k]),
            )
            for k in range(d)
        ]
        for i in range(d)
    ]
    v = b.run()
    grad_x = np.array([(v[p] - v[m]) / (2 * h1) for p, m in gx])
    grad_x2 = np.array([(v[p] - v[m]) / (2 * h1) for p, m in gx2])
    A = np.array(
        [[(v[a] - v[bb] - v[c] + v[dd]) / (4 * h2 * h2) for a, bb, c, dd in row] for row in mixed]
    )
    return float(v[centre]), grad_x, grad_x2, A


def _check_mixed(A: np.ndarray, x, x2) -> None:
    scale = max(1.0, float(np.max(np.abs(A))))
    det = np.linalg.det(A)
    if not np.isfinite(det) or abs(det) <= 1e-10 * scale ** A.shape[0]:
        raise SingularMixed(
            f"sigma_ik' is singular at x={np.asarray(x).tolist()}, x'={np.asarray(x2).tolist()}"
        )


def sigma_derivatives(space: SigmaSpace, x, x2, fd_step: float = DEFAULT_FD_STEP) -> TangentData:
    """Central-difference sigma_i, sigma_{i'} and sigma_{ik'} at the pair (x, x')."""
    x = space.as_points(x).astype(float).reshape(-1)
    x2 = space.as_points(x2).astype(float).reshape(-1)
    s, gx, gx2, A = _first_and_mixed(space, x, x2, fd_step)
    _check_mixed(A, x, x2)
    return TangentData(x, x2, s, gx, gx2, A, fd_step)


def coincidence_metric(space: SigmaSpace, x, fd_step: float = DEFAULT_FD_STEP) -> np.ndarray:
    """g_ik(x) = -sigma_{ik'}(x, x), the metric recovered from sigma alone."""
    x = space.as_points(x).astype(float).reshape(-1)
    _, _, _, A = _first_and_mixed(space, x, x, fd_step)
    g = -0.5 * (A + A.T)
    return g


def _metric_at(space, metric, p, fd_step) -> np.ndarray:
    if metric is not None:
        return np.asarray(metric(p), dtype=float)
    return coincidence_metric(space, p, fd_step)


def tangent_metric(space: SigmaSpace, metric=None, x=None, x2=None, fd_step: float = DEFAULT_FD_STEP) -> TangentData:
    """G_ik of the tangent Euclidean space at x', Delta_ik = G_ik - g_ik(x), and the transport operator.

    ``metric`` is a MetricField (or any callable x -> g(x)); without it the
    metric is recovered from the coincidence limit of sigma.
    """
    base = sigma_derivatives(space, x, x2, fd_step)
    x, x2 = base.x, base.x2
    d = len(x)
    _, h2, h3 = _steps(x, x2, fd_step)
    e3 = np.eye(d) * h3

    b = _Batch(space)
    hess_plans = [[_second_x(b, x, x2, h2, i, k) for k in range(d)] for i in range(d)]
    third_plans = [
        [
            [
                (_second_x(b, x, x2 + e3[s], h3, k, l), _second_x(b, x, x2 - e3[s], h3, k, l))
                for s in range(d)
            ]
            for l in range(d)
        ]
        for k in range(d)
    ]
    v = b.run()
    H = np.array([[_apply(v, hess_plans[i][k]) for k in range(d)] for i in range(d)])
    H = 0.5 * (H + H.T)
    T = np.empty((d, d, d))  # T[k, l, s] = sigma_{kls'}
    for k in range(d):
        for l in range(d):
            for s in range(d):
                plus, minus = third_plans[k][l][s]
                T[k, l, s] = (_apply(v, plus) - _apply(v, minus)) / (2 * h3)

    B = base.mixed_inverse  # sigma^{ls'} as [l, s]
    gamma = np.einsum("ls,iks->lik", B, T)  # Gamma^l_ik(x, x')
    G = H - np.einsum("lik,l->ik", gamma, base.grad_x)
    G = 0.5 * (G + G.T)
    g_x = _metric_at(space, metric, x, fd_step)
    g_x2 = _metric_at(space, metric, x2, fd_step)
    transport = -base.mixed @ np.linalg.inv(g_x2)
    return TangentData(
        x, x2, base.sigma_value, base.grad_x, base.grad_x2, base.mixed, fd_step,
        G=G, Delta=G - g_x, g_x=g_x, g_x2=g_x2, transport=transport,
        extras={"hessian_x": H, "third": T, "christoffel_xx2": gamma},
    )


@dataclass(frozen=True)
class IdentityDiagnostics:
    """Residuals of three world-function identities at one pair.

    * ``identity1``: sigma_l sigma^{lj'} sigma_{j'} - 2 sigma
    * ``delta_sigma``: |(G_ik - g_ik) sigma^k| with sigma^k = g^{kl} sigma_l
    * ``metric_x2``: max |g_{l's'} - sigma_{il'} G^{ik} sigma_{ks'}|
    """

    x: list
    x2: list
    fd_step: float
    sigma: float
    identity1: float
    identity1_rel: float
    delta_sigma: float
    delta_sigma_rel: float
    metric_x2: float
    metric_x2_rel: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def check_worldfunction_identities(space: SigmaSpace, x, x2, fd_step: float = DEFAULT_FD_STEP, metric=None) -> IdentityDiagnostics:
    td = tangent_metric(space, metric, x, x2, fd_step)
    B = td.mixed_inverse
    id1 = float(td.grad_x @ B @ td.grad_x2) - 2.0 * td.sigma_value
    id1_rel = abs(id1) / max(1.0, 2.0 * abs(td.sigma_value))

    sig_up = np.linalg.solve(td.g_x, td.grad_x)
    r2 = td.Delta @ sig_up
    delta_sigma = float(np.linalg.norm(r2))
    denom = float(np.linalg.norm(td.Delta) * np.linalg.norm(sig_up))
    delta_sigma_rel = delta_sigma / max(denom, 1.0)

    back = td.mixed.T @ np.linalg.inv(td.G) @ td.mixed
    r3 = float(np.max(np.abs(td.g_x2 - back)))
    r3_rel = r3 / max(1.0, float(np.max(np.abs(td.g_x2))))
    return IdentityDiagnostics(
        td.x.tolist(), td.x2.tolist(), fd_step, td.sigma_value,
        id1, id1_rel, delta_sigma, delta_sigma_rel, r3, r3_rel,
    )
