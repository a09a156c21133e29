"""Independent reference implementations used only by the tests.

Each one takes the slow, obvious route so it shares no code path with the
implementation it checks.
"""

import itertools
import math

import numpy as np


def naive_operator(values, phi):
    """Direct triple loop: phi(x) returns the J basis values at scalar x."""
    n = len(values) - 1
    evals = [list(phi(v)) for v in values]
    J = len(evals[0])
    out = [[0.0] * J for _ in range(J)]
    for j in range(J):
        for k in range(J):
            s = 0.0
            for i in range(1, n + 1):
                s += evals[i - 1][j] * evals[i][k] + evals[i - 1][k] * evals[i][j]
            out[j][k] = s / (2 * n)
    return np.array(out)


def warping_paths(n, m):
    """Every monotone path from (0, 0) to (n-1, m-1) as (cells, weights)."""
    out = []

    def walk(i, j, cells, weights):
        if (i, j) == (n - 1, m - 1):
            out.append((list(cells), list(weights)))
            return
        for di, dj, w in ((1, 0, 1), (0, 1, 1), (1, 1, 2)):
            a, b = i + di, j + dj
            if a < n and b < m:
                cells.append((a, b))
                weights.append(w)
                walk(a, b, cells, weights)
                cells.pop()
                weights.pop()

    walk(0, 0, [(0, 0)], [1])
    return out


def path_weight_matrix(n, m):
    """Rows: warping paths; columns: cells i*m+j; entries: step weights."""
    paths = warping_paths(n, m)
    W = np.zeros((len(paths), n * m))
    for r, (cells, weights) in enumerate(paths):
        for (i, j), w in zip(cells, weights):
            W[r, i * m + j] += w
    return W


def dtw_enumerate(x, y):
    """Minimum weighted cost over all warping paths, by enumeration."""
    x, y = list(x), list(y)
    best = math.inf
    for cells, weights in warping_paths(len(x), len(y)):
        best = min(best, sum(w * abs(x[i] - y[j]) for (i, j), w in zip(cells, weights)))
    return best


def naive_complete_linkage(D):
    """Recompute max-linkage between all live clusters from scratch each step.

    Returns merges as (left id, right id, height) with the same node-id and
    tie-break conventions: smallest height, then smallest (min id, max id).
    """
    D = np.asarray(D)
    P = D.shape[0]
    clusters = {i: [i] for i in range(P)}
    merges = []
    next_id = P
    while len(clusters) > 1:
        best = None
        for a, b in itertools.combinations(sorted(clusters), 2):
            h = max(D[i, j] for i in clusters[a] for j in clusters[b])
            key = (h, a, b)
            if best is None or key < best:
                best = key
        h, a, b = best
        merges.append((a, b, h))
        clusters[next_id] = clusters.pop(a) + clusters.pop(b)
        next_id += 1
    return merges


def random_planar_distances(rng, n):
    pts = rng.normal(size=(n, 2))
    diff = pts[:, None, :] - pts[None, :, :]
    return pts, np.sqrt((diff ** 2).sum(-1))


def random_path(rng, n=50, delta=0.1, label="", lo=0.0, hi=1.0):
    from diffclust.sde import Path
    return Path(rng.uniform(lo, hi, n), delta, label)


def mvee_area_slsqp(pts):
    """Minimum enclosing-ellipse area by direct constrained optimisation."""
    from scipy.optimize import minimize

    pts = np.asarray(pts, float)
    c0 = pts.mean(0)
    r = np.max(np.linalg.norm(pts - c0, axis=1))

    def unpack(z):
        return np.array([[z[0], 0.0], [z[1], z[2]]]), z[3:]

    def area(z):
        return -np.log(abs(z[0] * z[2]))

    def slack(z):
        L, c = unpack(z)
        return 1.0 - np.sum(((pts - c) @ L.T) ** 2, axis=1)

    z0 = np.array([1 / r, 0.0, 1 / r, *c0])
    res = minimize(area, z0, constraints=[{"type": "ineq", "fun": slack}], method="SLSQP",
                   options={"ftol": 1e-14, "maxiter": 2000})
    L, _ = unpack(res.x)
    return np.pi / abs(L[0, 0] * L[1, 1])


def gram_by_quadrature(basis, n_nodes=64):
    """Gram matrix of an evaluated basis with numpy's Gauss-Legendre nodes per knot span."""
    t, w = np.polynomial.legendre.leggauss(n_nodes)
    breaks = np.unique(basis.knots)
    G = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        x = (a + b) / 2 + (b - a) / 2 * t
        phi = basis(x)
        G = G + (phi * (w * (b - a) / 2)[:, None]).T @ phi
    return G
