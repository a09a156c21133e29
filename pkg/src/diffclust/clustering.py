"""Complete-linkage clustering, dendrogram cuts, classical MDS and
minimum-area enclosing ellipses."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ClusteringError, DegenerateEmbeddingWarning
from .metrics import DistanceMatrix


@dataclass(frozen=True)
class Merge:
    left: int
    right: int
    height: float


@dataclass(frozen=True)
class Dendrogram:
    """Merge tree. Leaves are nodes ``0..P-1``; merge ``i`` creates node ``P+i``."""

    merges: tuple
    leaf_labels: tuple

    @property
    def n_leaves(self) -> int:
        return len(self.leaf_labels)

    def heights(self) -> np.ndarray:
        return np.array([m.height for m in self.merges])

    def members(self, node: int) -> list:
        """Leaf ids under ``node``, ascending."""
        P = self.n_leaves
        stack, out = [node], []
        while stack:
            v = stack.pop()
            if v < P:
                out.append(v)
            else:
                m = self.merges[v - P]
                stack.extend((m.left, m.right))
        return sorted(out)

    def to_linkage(self) -> np.ndarray:
        """SciPy-style linkage matrix ``[left, right, height, size]``."""
        P = self.n_leaves
        sizes = [1] * P
        Z = np.zeros((len(self.merges), 4))
        for i, m in enumerate(self.merges):
            sizes.append(sizes[m.left] + sizes[m.right])
            Z[i] = (m.left, m.right, m.height, sizes[P + i])
        return Z


def hac_complete(m: DistanceMatrix) -> Dendrogram:
    """Agglomerative clustering with complete (maximum) linkage.

    Ties are broken by the lexicographically smallest ``(min id, max id)``
    pair of node ids.
    """
    P = m.size
    if P < 2:
        raise ClusteringError("need at least two observations")
    D = np.array(m.d, dtype=np.float64)
    ids = list(range(P))
    merges = []
    for step in range(P - 1):
        n = len(ids)
        # active ids stay sorted, so row-major argmin over the upper triangle
        # picks the lexicographically smallest pair among ties
        masked = np.where(np.triu(np.ones((n, n), dtype=bool), 1), D, np.inf)
        a, b = divmod(int(np.argmin(masked)), n)
        height = float(D[a, b])
        merges.append(Merge(ids[a], ids[b], height))
        row = np.maximum(D[a], D[b])
        keep = [i for i in range(n) if i not in (a, b)]
        row = row[keep]
        D = D[np.ix_(keep, keep)]
        D = np.block([[D, row[:, None]], [row[None, :], np.zeros((1, 1))]])
        ids = [ids[i] for i in keep] + [P + step]
    return Dendrogram(tuple(merges), tuple(m.labels))


@dataclass(frozen=True)
class ClusterAssignment:
    labels: dict

    def as_list(self, order) -> list:
        return [self.labels[k] for k in order]

    @property
    def k(self) -> int:
        return len(set(self.labels.values()))


def cut(d: Dendrogram, k: int) -> ClusterAssignment:
    """Undo the last ``k-1`` merges; clusters numbered 1..k by first leaf."""
    P = d.n_leaves
    if not 1 <= k <= P:
        raise ClusteringError(f"k must lie in [1, {P}], got {k}")
    parent = list(range(2 * P - 1))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for i, mg in enumerate(d.merges[:P - k]):
        parent[find(mg.left)] = P + i
        parent[find(mg.right)] = P + i
    index, labels = {}, {}
    for leaf in range(P):
        root = find(leaf)
        index.setdefault(root, len(index) + 1)
        labels[d.leaf_labels[leaf]] = index[root]
    return ClusterAssignment(labels)


@dataclass(frozen=True, eq=False)
class Embedding2D:
    labels: list
    coords: np.ndarray
    eigenvalues: np.ndarray


def classical_mds(m: DistanceMatrix, dims=2) -> Embedding2D:
    """Torgerson scaling: top eigenpairs of ``-1/2 J D^2 J``.

    Each eigenvector is signed so its largest-magnitude component is
    positive; non-positive eigenvalues give zero columns.
    """
    P = m.size
    if P < 3:
        raise ClusteringError("MDS needs at least three observations")
    J = np.eye(P) - 1.0 / P
    B = -0.5 * J @ (m.d ** 2) @ J
    B = (B + B.T) / 2
    evals, evecs = np.linalg.eigh(B)
    order = np.argsort(evals)[::-1][:dims]
    evals, evecs = evals[order], evecs[:, order]
    scale = max(abs(evals[0]), 1e-300)
    coords = np.zeros((P, dims))
    n_pos = 0
    for c in range(dims):
        v = evecs[:, c]
        v = v if v[np.argmax(np.abs(v))] > 0 else -v
        if evals[c] > 1e-10 * scale:
            coords[:, c] = v * math.sqrt(evals[c])
            n_pos += 1
    if n_pos < dims:
        warnings.warn(f"only {n_pos} positive eigenvalue(s); padding with zeros",
                      DegenerateEmbeddingWarning, stacklevel=2)
    return Embedding2D(list(m.labels), coords, evals)


@dataclass(frozen=True)
class Ellipse:
    """``center``, semi-axes ``(major, minor)`` and the major-axis angle in radians."""

    center: tuple
    semi_axes: tuple
    angle: float
    degenerate: bool = False

    def contains(self, points, inflate=1.0 + 1e-6) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64)) - np.asarray(self.center)
        a, b = self.semi_axes[0] * inflate, self.semi_axes[1] * inflate
        c, s = math.cos(self.angle), math.sin(self.angle)
        u = pts[:, 0] * c + pts[:, 1] * s
        v = -pts[:, 0] * s + pts[:, 1] * c
        if a == 0:
            return (u == 0) & (v == 0)
        return (u / a) ** 2 + (v / b) ** 2 <= 1.0

    def outline(self, n=100) -> np.ndarray:
        t = np.linspace(0, 2 * np.pi, n)
        a, b = self.semi_axes
        c, s = math.cos(self.angle), math.sin(self.angle)
        x, y = a * np.cos(t), b * np.sin(t)
        return np.column_stack([self.center[0] + c * x - s * y,
                                self.center[1] + s * x + c * y])

    def as_dict(self) -> dict:
        return {"center": list(self.center), "semi_axes": list(self.semi_axes),
                "angle": self.angle, "degenerate": self.degenerate}


def _segment_ellipse(pts) -> Ellipse:
    centered = pts - pts.mean(axis=0)
    _, _, vt = np.linalg.svd(centered)
    direction = vt[0]
    proj = pts @ direction
    lo, hi = proj.min(), proj.max()
    mid = (lo + hi) / 2
    center = pts.mean(axis=0) + (mid - pts.mean(axis=0) @ direction) * direction
    major = (hi - lo) / 2
    angle = math.atan2(direction[1], direction[0])
    return Ellipse((float(center[0]), float(center[1])),
                   (float(major), float(major * 1e-6)), angle, degenerate=True)


def ellipsoid_hull(points, tol=1e-7, max_iter=100_000) -> Ellipse:
    """Minimum-area ellipse enclosing planar points.

    Khachiyan's algorithm with away steps; ``tol`` bounds the relative
    duality gap.

    The converged ellipse is scaled so that the outermost point lies on it.
    Collinear or coincident points yield a thin degenerate ellipse.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise ValueError("need at least three 2-D points")
    centered = pts - pts.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    if sv[0] == 0 or sv[1] <= 1e-10 * sv[0]:
        return _segment_ellipse(pts)

    n, d = pts.shape
    Q = np.vstack([pts.T, np.ones(n)])
    u = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        X = (Q * u) @ Q.T
        M = np.einsum("ij,ji->i", Q.T, np.linalg.solve(X, Q))
        j = int(np.argmax(M))
        live = np.flatnonzero(u > 0)
        i = int(live[np.argmin(M[live])])
        up = M[j] / (d + 1.0) - 1.0
        down = 1.0 - M[i] / (d + 1.0)
        if max(up, down) < tol:
            break
        if up >= down:
            step = (M[j] - d - 1.0) / ((d + 1.0) * (M[j] - 1.0))
            u *= 1.0 - step
            u[j] += step
        else:
            # away step, capped so the weight of point i stays non-negative
            step = min((d + 1.0 - M[i]) / ((d + 1.0) * (M[i] - 1.0)), u[i] / (1.0 - u[i]))
            u *= 1.0 + step
            u[i] -= step
            u[i] = max(u[i], 0.0)
    c = pts.T @ u
    A = np.linalg.inv((pts.T * u) @ pts - np.outer(c, c)) / d
    dev = pts - c
    A = A / np.max(np.einsum("ij,jk,ik->i", dev, A, dev))
    evals, evecs = np.linalg.eigh(A)
    # smallest eigenvalue of A is the major axis
    major = evecs[:, 0]
    angle = math.atan2(major[1], major[0])
    axes = (float(1 / math.sqrt(evals[0])), float(1 / math.sqrt(evals[1])))
    return Ellipse((float(c[0]), float(c[1])), axes, angle)
