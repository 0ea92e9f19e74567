"""World-function spaces and the Gram / scalar-product kernel.

A sigma-space is a set of points with a real function sigma(P, Q) that is
symmetric and vanishes on the diagonal.  Nothing else is assumed: sigma may
be negative (pseudo-Euclidean spaces) and no triangle inequality is checked.

Two concrete carriers exist.  `SigmaSpace` wraps a vectorised evaluator over
coordinate points (arrays whose trailing axis is the ambient dimension), and
`FiniteSigmaSpace` holds an explicit symmetric table indexed by integer
labels.  Every geometric quantity in the package is computed from sigma only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BasisTooLarge,
    DomainError,
    NegativeSigma,
    TriangleInequalityViolated,
    ZeroVector,
)

MAX_ORDER = 16
ABS_FLOOR = 1e-12
DEFAULT_TOL = 1e-9

SigmaFunc = Callable[[np.ndarray, np.ndarray], np.ndarray]


class SigmaSpace:
    """A world function on coordinate points of a fixed ambient dimension.

    ``func(p, q)`` must broadcast over leading axes: ``p`` and ``q`` have shape
    ``(..., dim)`` and the result has the broadcast leading shape.
    """

    is_finite = False

    def __init__(
        self,
        func: SigmaFunc,
        dim: int,
        *,
        kind: str = "custom",
        signature: tuple[int, int] | None = None,
        sampler: Callable[[np.random.Generator, int], np.ndarray] | None = None,
        domain: Callable[[np.ndarray], np.ndarray] | None = None,
        metric_field=None,
        flat: bool = False,
    ):
        if dim < 1:
            raise ValueError("dim must be positive")
        self._func = func
        self.dim = int(dim)
        self.kind = kind
        self.signature = signature
        self.sampler = sampler
        self._domain = domain
        self.metric_field = metric_field
        self.flat = flat

    def __repr__(self) -> str:
        return f"{type(self).__name__}(kind={self.kind!r}, dim={self.dim})"

    def as_points(self, p) -> np.ndarray:
        arr = np.asarray(p, dtype=float)
        if arr.ndim == 0 or arr.shape[-1] != self.dim:
            raise DomainError(
                f"expected points with {self.dim} coordinates, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise DomainError("point coordinates must be finite")
        return arr

    def contains(self, p) -> np.ndarray:
        """Boolean mask of points inside the domain (always true without a domain hook)."""
        arr = self.as_points(p)
        if self._domain is None:
            return np.ones(arr.shape[:-1], dtype=bool)
        return np.asarray(self._domain(arr), dtype=bool)

    def sigma(self, p, q) -> np.ndarray:
        return self._func(self.as_points(p), self.as_points(q))

    def pairwise(self, ps, qs) -> np.ndarray:
        """sigma for every pair, shape ``(len(ps), len(qs))``."""
        P = self.as_points(ps).reshape(-1, self.dim)
        Q = self.as_points(qs).reshape(-1, self.dim)
        return np.asarray(self._func(P[:, None, :], Q[None, :, :]), dtype=float)

    def along(self, p0, qs) -> np.ndarray:
        """sigma(p0, q) for each q in ``qs``."""
        Q = self.as_points(qs).reshape(-1, self.dim)
        return np.asarray(self._func(self.as_points(p0)[None, :], Q), dtype=float)

    def same_point(self, p, q, tol: float = 0.0) -> bool:
        a, b = self.as_points(p), self.as_points(q)
        return bool(np.all(np.abs(a - b) <= tol * max(1.0, float(np.max(np.abs(a))))))

    def __call__(self, p, q) -> float:
        return float(self.sigma(p, q))


class FiniteSigmaSpace(SigmaSpace):
    """n+1 labelled points carrying an explicit symmetric sigma table."""

    is_finite = True

    def __init__(self, table, *, kind: str = "finite"):
        t = np.array(table, dtype=float)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
            raise ValueError(f"sigma table must be a non-empty square matrix, got {t.shape}")
        if not np.all(np.isfinite(t)):
            raise ValueError("sigma table entries must be finite")
        if np.any(np.diag(t) != 0.0):
            raise ValueError("sigma table must have a zero diagonal")
        if not np.array_equal(t, t.T):
            i, j = np.argwhere(t != t.T)[0]
            raise ValueError(
                f"sigma table is not symmetric: [{i},{j}]={t[i, j]!r} vs [{j},{i}]={t[j, i]!r}"
            )
        t.setflags(write=False)
        self.table = t
        self.size = t.shape[0]
        super().__init__(self._lookup, dim=1, kind=kind, flat=False)
        self.dim = None
        self.sampler = self._sample_labels

    def _lookup(self, p, q):
        return self.table[p, q]

    def _sample_labels(self, rng: np.random.Generator, count: int) -> np.ndarray:
        labels = rng.permutation(self.size)
        return labels[: min(count, self.size)]

    def as_points(self, p) -> np.ndarray:
        arr = np.asarray(p)
        if arr.dtype.kind == "f":
            if not np.all(arr == np.round(arr)):
                raise DomainError("finite-space points are integer labels")
            arr = arr.astype(int)
        elif arr.dtype.kind not in "iu":
            raise DomainError(f"finite-space points are integer labels, got {arr.dtype}")
        if np.any(arr < 0) or np.any(arr >= self.size):
            raise DomainError(f"label out of range 0..{self.size - 1}")
        return arr

    def contains(self, p) -> np.ndarray:
        return np.ones(np.shape(self.as_points(p)), dtype=bool)

    def sigma(self, p, q) -> np.ndarray:
        return self.table[self.as_points(p), self.as_points(q)]

    def pairwise(self, ps, qs) -> np.ndarray:
        P = self.as_points(ps).reshape(-1)
        Q = self.as_points(qs).reshape(-1)
        return self.table[np.ix_(P, Q)]

    def along(self, p0, qs) -> np.ndarray:
        return self.table[self.as_points(p0), self.as_points(qs).reshape(-1)]

    def same_point(self, p, q, tol: float = 0.0) -> bool:
        return int(self.as_points(p)) == int(self.as_points(q))

    def __repr__(self) -> str:
        return f"FiniteSigmaSpace(size={self.size})"


@dataclass(frozen=True)
class GramResult:
    """Gram matrix g_ik = Gamma(P0, Pi, Pk) of a basis and its determinant F_n."""

    gamma_matrix: np.ndarray
    determinant: float
    basis: tuple

    @property
    def order(self) -> int:
        return self.gamma_matrix.shape[0]

    @property
    def squared_length(self) -> float:
        """|M(P^n)|^2, which equals (n! * simplex volume)^2 in proper Euclidean space."""
        return self.determinant


def _point_list(space: SigmaSpace, points: Sequence) -> np.ndarray:
    if space.is_finite:
        return space.as_points(np.asarray(points)).reshape(-1)
    return space.as_points(np.asarray(points, dtype=float)).reshape(-1, space.dim)


def sigma(space: SigmaSpace, p, q) -> float:
    return float(space.sigma(p, q))


def metric(space: SigmaSpace, p, q) -> float:
    """rho = sqrt(2 sigma); raises NegativeSigma for spacelike pairs."""
    s = sigma(space, p, q)
    if s < 0:
        raise NegativeSigma(s)
    return math.sqrt(2.0 * s)


def gamma(space: SigmaSpace, p0, p1, p2) -> float:
    """Scalar product (P0P1 . P0P2) = sigma(P0,P1) + sigma(P0,P2) - sigma(P1,P2)."""
    return sigma(space, p0, p1) + sigma(space, p0, p2) - sigma(space, p1, p2)


def scalar_product(space: SigmaSpace, p0, p1, q0, q1) -> float:
    """Scalar product (P0P1 . Q0Q1) of two vectors with arbitrary origins."""
    return (
        sigma(space, p0, q1)
        + sigma(space, q0, p1)
        - sigma(space, p0, q0)
        - sigma(space, p1, q1)
    )


def gamma_matrix(space: SigmaSpace, basis: Sequence) -> np.ndarray:
    pts = _point_list(space, basis)
    if len(pts) < 2:
        raise ValueError("a Gram matrix needs at least two points (n >= 1)")
    if len(pts) - 1 > MAX_ORDER:
        raise BasisTooLarge(f"order {len(pts) - 1} exceeds the cap of {MAX_ORDER}")
    S = space.pairwise(pts, pts)
    s0 = S[0, 1:]
    g = s0[:, None] + s0[None, :] - S[1:, 1:]
    return g


def gram(space: SigmaSpace, basis: Sequence) -> GramResult:
    g = gamma_matrix(space, basis)
    g.setflags(write=False)
    return GramResult(g, float(np.linalg.det(g)), tuple(map(_as_key, _point_list(space, basis))))


def _as_key(p):
    return tuple(np.atleast_1d(p).tolist()) if np.ndim(p) else int(p)


def extension_determinants(space: SigmaSpace, basis: Sequence, points) -> tuple[np.ndarray, float, np.ndarray]:
    """F_{n+1}(basis + r) for every r in ``points``.

    The basis itself is capped at order MAX_ORDER; the extension may reach
    MAX_ORDER + 1 so that a maximal basis can still be tested.

    Returns ``(F_next, F_n, scale)`` where ``scale`` is the per-point natural
    squared-length scale max(1, 2|sigma(P0, Pi)|, 2|sigma(P0, r)|).
    """
    pts = _point_list(space, basis)
    R = _point_list(space, points)
    g = gamma_matrix(space, pts)
    n = g.shape[0]
    s0r = space.along(pts[0], R)  # sigma(P0, r)
    s0i = space.along(pts[0], pts[1:])  # sigma(P0, Pi)
    sir = space.pairwise(pts[1:], R).T  # (N, n): sigma(Pi, r)
    col = s0i[None, :] + s0r[:, None] - sir
    M = np.empty((len(R), n + 1, n + 1))
    M[:, :n, :n] = g
    M[:, :n, n] = col
    M[:, n, :n] = col
    M[:, n, n] = 2.0 * s0r
    F_next = np.linalg.det(M)
    base_scale = max(1.0, float(np.max(2.0 * np.abs(s0i))))
    scale = np.maximum(base_scale, 2.0 * np.abs(s0r))
    return F_next, float(np.linalg.det(g)), scale


def hero_area(a: float, b: float, c: float, tol: float = ABS_FLOOR) -> float:
    """Triangle area from side lengths."""
    if min(a, b, c) < 0:
        raise TriangleInequalityViolated(f"negative side length in ({a}, {b}, {c})")
    p = 0.5 * (a + b + c)
    factors = (p - a, p - b, p - c)
    floor = tol * max(p, 1.0)
    if min(factors) < -floor:
        raise TriangleInequalityViolated(f"sides ({a}, {b}, {c}) violate the triangle inequality")
    prod = p * max(factors[0], 0.0) * max(factors[1], 0.0) * max(factors[2], 0.0)
    return math.sqrt(prod)


def collinearity_residual(space: SigmaSpace, p0, p1, q0, q1) -> tuple[float, float, float, float]:
    """(P0P1.Q0Q1)^2 - |P0P1|^2 |Q0Q1|^2 together with its three ingredients."""
    ab = scalar_product(space, p0, p1, q0, q1)
    aa = 2.0 * sigma(space, p0, p1)
    bb = 2.0 * sigma(space, q0, q1)
    return ab * ab - aa * bb, ab, aa, bb


def is_collinear(space: SigmaSpace, p0, p1, q0, q1, tol: float = DEFAULT_TOL) -> bool:
    """True when P0P1 || Q0Q1, i.e. (P0P1.Q0Q1)^2 = |P0P1|^2 |Q0Q1|^2."""
    res, _, aa, bb = collinearity_residual(space, p0, p1, q0, q1)
    zero = max(tol, ABS_FLOOR)
    if abs(aa) <= zero:
        raise ZeroVector("|P0P1|^2 vanishes; use the collinearity cone for null vectors")
    if abs(bb) <= zero:
        raise ZeroVector("|Q0Q1|^2 vanishes; use the collinearity cone for null vectors")
    scale = max(abs(aa * bb), 1.0)
    return abs(res) <= max(tol, ABS_FLOOR) * scale
