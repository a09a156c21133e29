"""Orthonormal B-spline bases on a compact interval."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import BasisError

GAUSS_NODES = 64


@dataclass(frozen=True)
class SupportInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi) and self.lo < self.hi):
            raise ValueError(f"invalid support [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo


def detect_support(paths, enlarge=0.10) -> SupportInterval:
    """Range of all observations, widened by ``enlarge * width`` in total.

    A zero-width range is widened by 1.0 instead.
    """
    paths = list(paths)
    if not paths:
        raise ValueError("need at least one path")
    if enlarge < 0:
        raise ValueError("enlarge must be non-negative")
    lo = min(float(np.min(p.values)) for p in paths)
    hi = max(float(np.max(p.values)) for p in paths)
    w = hi - lo
    pad = 0.5 if w == 0 else enlarge * w / 2
    return SupportInterval(lo - pad, hi + pad)


def open_uniform_knots(support: SupportInterval, degree: int, n_basis: int) -> np.ndarray:
    n_interior = n_basis - degree - 1
    inner = np.linspace(support.lo, support.hi, n_interior + 2)
    return np.concatenate([np.full(degree, support.lo), inner, np.full(degree, support.hi)])


def bspline_design(knots, degree, x) -> np.ndarray:
    """Raw B-spline values ``B_j(x)`` for every point, shape ``(len(x), J)``.

    Cox-de Boor triangular recurrence, vectorised over points. Spans are
    half-open ``[t_i, t_{i+1})`` except the last, which is closed, and
    points outside ``[t_0, t_last]`` evaluate to zero.
    """
    knots = np.asarray(knots, dtype=np.float64)
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    p = degree
    n_basis = knots.size - p - 1
    lo, hi = knots[p], knots[-p - 1]
    out = np.zeros((x.size, n_basis))
    inside = (x >= lo) & (x <= hi)
    xi = x[inside]
    if xi.size == 0:
        return out
    # span index i with t_i <= x < t_{i+1}, restricted to p..n_basis-1
    span = np.searchsorted(knots, xi, side="right") - 1
    span = np.clip(span, p, n_basis - 1)

    vals = np.zeros((xi.size, p + 1))
    vals[:, 0] = 1.0
    left = np.empty((xi.size, p + 1))
    right = np.empty((xi.size, p + 1))
    for j in range(1, p + 1):
        left[:, j] = xi - knots[span + 1 - j]
        right[:, j] = knots[span + j] - xi
        saved = np.zeros(xi.size)
        for r in range(j):
            temp = vals[:, r] / (right[:, r + 1] + left[:, j - r])
            vals[:, r] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        vals[:, j] = saved

    rows = np.flatnonzero(inside)
    cols = span[:, None] - p + np.arange(p + 1)
    out[rows[:, None], cols] = vals
    return out


def gauss_legendre_rule(breaks, n_nodes=GAUSS_NODES):
    """Composite Gauss-Legendre nodes and weights over consecutive breaks."""
    breaks = np.unique(np.asarray(breaks, dtype=np.float64))
    t, w = np.polynomial.legendre.leggauss(n_nodes)
    a, b = breaks[:-1, None], breaks[1:, None]
    half = (b - a) / 2
    nodes = (a + b) / 2 + half * t
    weights = half * w
    return nodes.ravel(), weights.ravel()


@dataclass(frozen=True, eq=False)
class OrthonormalBasis:
    """``phi = mix @ B`` for raw B-splines ``B`` on an open-uniform knot vector.

    ``mix`` is the inverse of the lower Cholesky factor of the raw Gram
    matrix, so ``phi_j`` only involves ``B_1 .. B_j`` (Gram-Schmidt in
    index order).
    """

    degree: int
    n_basis: int
    knots: np.ndarray
    mix: np.ndarray
    support: SupportInterval

    @property
    def key(self) -> tuple:
        """Identifies bases built from the same parameters."""
        return (self.degree, self.n_basis, self.support.lo, self.support.hi)

    def raw(self, x) -> np.ndarray:
        return bspline_design(self.knots, self.degree, x)

    def __call__(self, x) -> np.ndarray:
        """Orthonormal functions at ``x``, shape ``(len(x), J)``."""
        return self.raw(x) @ self.mix.T

    def gram(self, n_nodes=GAUSS_NODES) -> np.ndarray:
        nodes, weights = gauss_legendre_rule(self.knots, n_nodes)
        phi = self(nodes)
        return (phi * weights[:, None]).T @ phi


def raw_gram(knots, degree, n_nodes=GAUSS_NODES) -> np.ndarray:
    nodes, weights = gauss_legendre_rule(knots, n_nodes)
    B = bspline_design(knots, degree, nodes)
    return (B * weights[:, None]).T @ B


def build_basis(support: SupportInterval, degree=10, n_basis=20) -> OrthonormalBasis:
    if degree < 0 or n_basis <= degree:
        raise ValueError("need n_basis > degree >= 0")
    knots = open_uniform_knots(support, degree, n_basis)
    G = raw_gram(knots, degree)
    try:
        L = linalg.cholesky(G, lower=True)
    except linalg.LinAlgError as exc:
        raise BasisError(f"raw Gram matrix is not positive definite: {exc}") from exc
    mix = linalg.solve_triangular(L, np.eye(n_basis), lower=True)
    mix.flags.writeable = False
    knots.flags.writeable = False
    return OrthonormalBasis(degree, n_basis, knots, mix, support)


def eval_basis(basis: OrthonormalBasis, x: float) -> np.ndarray:
    """``(phi_1(x), .., phi_J(x))``; zero outside the support."""
    return basis(np.array([x], dtype=np.float64))[0]
