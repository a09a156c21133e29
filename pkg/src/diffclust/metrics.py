"""Dissimilarities between sampled paths and pairwise distance matrices."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np

from .basis import OrthonormalBasis
from .errors import MetricError
from .markov import MarkovOperatorMatrix, estimate_operator
from .sde import Path

METRICS = ("MO", "STS", "EUC", "DTW")


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    labels: list
    d: np.ndarray
    metric_name: str

    def __post_init__(self):
        d = np.asarray(self.d, dtype=np.float64)
        if d.shape != (len(self.labels), len(self.labels)):
            raise ValueError("matrix shape does not match labels")
        if not (np.all(np.isfinite(d)) and np.all(d >= 0)):
            raise ValueError("distances must be finite and non-negative")
        if not np.array_equal(d, d.T) or np.any(np.diag(d) != 0):
            raise ValueError("distance matrix must be symmetric with zero diagonal")
        object.__setattr__(self, "d", d)

    @property
    def size(self) -> int:
        return len(self.labels)


def d_mo(a: MarkovOperatorMatrix, b: MarkovOperatorMatrix, sqrt=False) -> float:
    """Sum of squared entry differences of two operator estimates.

    This is a squared quantity; ``sqrt=True`` returns the Frobenius norm.
    """
    if a.basis_key != b.basis_key:
        raise MetricError("operators were estimated on different bases")
    diff = a.entries - b.entries
    s = float(np.sum(diff * diff))
    return float(np.sqrt(s)) if sqrt else s


def _check_same_length(x: Path, y: Path):
    if len(x) != len(y):
        raise MetricError(f"paths differ in length: {len(x)} vs {len(y)}")


def d_sts(x: Path, y: Path) -> float:
    """Root sum of squared slope differences (short-time-series distance)."""
    _check_same_length(x, y)
    if x.delta != y.delta:
        raise MetricError(f"paths differ in mesh: {x.delta} vs {y.delta}")
    slopes = np.diff(x.values) / x.delta - np.diff(y.values) / y.delta
    return float(np.sqrt(np.sum(slopes * slopes)))


def d_euc(x: Path, y: Path) -> float:
    _check_same_length(x, y)
    diff = x.values - y.values
    return float(np.sqrt(np.sum(diff * diff)))


@numba.njit(nogil=True, cache=True)
def _dtw_cost(x, y):
    n, m = x.size, y.size
    prev = np.empty(m)
    cur = np.empty(m)
    prev[0] = abs(x[0] - y[0])
    for j in range(1, m):
        prev[j] = prev[j - 1] + abs(x[0] - y[j])
    for i in range(1, n):
        c = abs(x[i] - y[0])
        cur[0] = prev[0] + c
        for j in range(1, m):
            c = abs(x[i] - y[j])
            best = prev[j] + c
            h = cur[j - 1] + c
            if h < best:
                best = h
            g = prev[j - 1] + 2.0 * c
            if g < best:
                best = g
            cur[j] = best
        prev, cur = cur, prev
    return prev[m - 1]


def d_dtw(x, y) -> float:
    """Unnormalised dynamic-time-warping cost with local cost ``|x_i - y_j|``.

    Symmetric step pattern: horizontal and vertical moves weigh the local
    cost once, diagonal moves twice; no window. Accepts paths or arrays.
    """
    xv = np.ascontiguousarray(getattr(x, "values", x), dtype=np.float64)
    yv = np.ascontiguousarray(getattr(y, "values", y), dtype=np.float64)
    if xv.size == 0 or yv.size == 0:
        raise MetricError("DTW needs non-empty sequences")
    return float(_dtw_cost(xv, yv))


def distance_matrix(paths, metric: str, basis: Optional[OrthonormalBasis] = None,
                    n_jobs: int = 1, mo_sqrt=False) -> DistanceMatrix:
    """Pairwise distances over the upper triangle, mirrored.

    For ``MO`` each path's operator is estimated once. ``n_jobs > 1``
    evaluates pairs on a thread pool; the result does not depend on it.
    """
    metric = metric.upper()
    if metric not in METRICS:
        raise MetricError(f"unknown metric {metric!r}; expected one of {METRICS}")
    if (metric == "MO") != (basis is not None):
        raise MetricError("a basis is required for MO and only for MO")
    paths = list(paths)
    n = len(paths)
    if metric == "MO":
        ops = [estimate_operator(p, basis) for p in paths]

        def pair(i, j):
            return d_mo(ops[i], ops[j], sqrt=mo_sqrt)
    else:
        fn = {"STS": d_sts, "EUC": d_euc, "DTW": d_dtw}[metric]

        def pair(i, j):
            return fn(paths[i], paths[j])

    idx = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if n_jobs > 1 and len(idx) > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            vals = list(pool.map(lambda ij: pair(*ij), idx))
    else:
        vals = [pair(i, j) for i, j in idx]
    d = np.zeros((n, n))
    for (i, j), v in zip(idx, vals):
        d[i, j] = d[j, i] = v
    return DistanceMatrix([p.label for p in paths], d, metric)


def rescale01(m: DistanceMatrix) -> DistanceMatrix:
    """Divide every entry by the largest one."""
    top = float(np.max(m.d)) if m.d.size else 0.0
    if top <= 0:
        raise MetricError("cannot rescale an all-zero distance matrix")
    return DistanceMatrix(list(m.labels), m.d / top, m.metric_name)
