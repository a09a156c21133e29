"""Scalar diffusion models, the second-order Milstein integrator and the
invariant density of an ergodic diffusion.

Random streams
--------------
Every simulated path draws its Gaussian increments from a Philox4x64
counter-based generator. The stream for path ``index`` under master seed
``seed`` is keyed by ``SeedSequence(seed, spawn_key=(index,))``; the same
rule is used for the initial value when none is given. The draws are
therefore reproducible bit for bit across platforms and independent of the
order in which paths are simulated.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numba
import numpy as np
from scipy import integrate

from .errors import ErgodicityError, SimulationError

ScalarFn = Callable[[float], float]

# fine steps generated per batch of normal draws
_CHUNK = 1 << 20


@dataclass(frozen=True)
class Path:
    """A uniformly sampled scalar series ``X_0 .. X_N`` with mesh ``delta``."""

    values: np.ndarray
    delta: float
    label: str = ""

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("a path needs at least two observations")
        if not np.all(np.isfinite(values)):
            raise ValueError(f"path {self.label!r} contains non-finite values")
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise ValueError(f"delta must be positive, got {self.delta}")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "delta", float(self.delta))

    def __len__(self):
        return self.values.size

    @property
    def n_transitions(self) -> int:
        return self.values.size - 1

    def reversed(self) -> "Path":
        return Path(self.values[::-1], self.delta, self.label)


@dataclass(frozen=True, eq=False)
class SDEModel:
    """Drift ``b`` and diffusion ``sigma`` of ``dX = b(X) dt + sigma(X) dW``.

    All six callables take and return plain floats. When they only use
    arithmetic and the ``math`` module they are compiled with numba and the
    integrator runs at native speed; anything else falls back to the
    interpreted loop.
    """

    drift: ScalarFn
    drift_d1: ScalarFn
    drift_d2: ScalarFn
    diffusion: ScalarFn
    diffusion_d1: ScalarFn
    diffusion_d2: ScalarFn
    state_lo: float = -math.inf
    state_hi: float = math.inf
    boundary_eps: float = 1e-6
    name: str = ""

    def __post_init__(self):
        if not self.state_lo < self.state_hi:
            raise ValueError("state_lo must be smaller than state_hi")
        width = self.state_hi - self.state_lo
        if not 0 < self.boundary_eps < width / 2:
            raise ValueError("boundary_eps must lie in (0, (hi - lo)/2)")

    @classmethod
    def from_functions(cls, drift, diffusion, **kwargs) -> "SDEModel":
        """Build a model whose derivatives are central finite differences
        with step ``1e-6 * (1 + |x|)``."""
        return cls(
            drift, _fd_first(drift), _fd_second(drift),
            diffusion, _fd_first(diffusion), _fd_second(diffusion),
            **kwargs,
        )

    @property
    def clamp_lo(self) -> float:
        return self.state_lo + self.boundary_eps if math.isfinite(self.state_lo) else -math.inf

    @property
    def clamp_hi(self) -> float:
        return self.state_hi - self.boundary_eps if math.isfinite(self.state_hi) else math.inf

    @property
    def functions(self) -> tuple:
        return (self.drift, self.drift_d1, self.drift_d2,
                self.diffusion, self.diffusion_d1, self.diffusion_d2)

    @cached_property
    def _jitted(self):
        try:
            return tuple(numba.njit(f) for f in self.functions)
        except TypeError:
            # callable objects that are not plain functions
            return None

    def check_derivatives(self, n_points=100, rtol=1e-6):
        """Compare the analytic derivatives with central differences.

        Returns the worst relative error (denominator floored at 1) over
        ``n_points`` equally spaced interior points.
        """
        lo = self.clamp_lo if math.isfinite(self.clamp_lo) else -5.0
        hi = self.clamp_hi if math.isfinite(self.clamp_hi) else 5.0
        margin = 0.01 * (hi - lo)
        xs = np.linspace(lo + margin, hi - margin, n_points)
        worst = 0.0
        pairs = ((self.drift, self.drift_d1, self.drift_d2),
                 (self.diffusion, self.diffusion_d1, self.diffusion_d2))
        for f, d1, d2 in pairs:
            for x in xs:
                h = 1e-4 * (1 + abs(x))
                fd1 = _richardson(f, x, h)
                fd2 = _richardson(d1, x, h)
                for exact, approx in ((d1(x), fd1), (d2(x), fd2)):
                    worst = max(worst, abs(exact - approx) / max(1.0, abs(exact)))
        return worst


def _richardson(f, x, h):
    # fourth-order central difference
    return (8.0 * (f(x + h) - f(x - h)) - (f(x + 2 * h) - f(x - 2 * h))) / (12.0 * h)


def _fd_first(f):
    def d1(x):
        h = 1e-6 * (1.0 + abs(x))
        return (f(x + h) - f(x - h)) / (2.0 * h)
    return d1


def _fd_second(f):
    def d2(x):
        h = 1e-6 * (1.0 + abs(x))
        # larger step keeps the second difference above round-off
        h = 1e2 * h
        return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
    return d2


@dataclass(frozen=True)
class SimulationConfig:
    dt_fine: float = 1e-4
    n_fine: int = 500_000
    resample_every: int = 1000
    seed: int = 0
    x0: Optional[float] = None

    def __post_init__(self):
        if not self.dt_fine > 0:
            raise ValueError("dt_fine must be positive")
        if self.resample_every < 1 or self.n_fine < self.resample_every:
            raise ValueError("need n_fine >= resample_every >= 1")
        if self.n_fine % self.resample_every:
            raise ValueError("n_fine must be divisible by resample_every")

    @property
    def delta(self) -> float:
        return self.resample_every * self.dt_fine

    @property
    def n_obs(self) -> int:
        return self.n_fine // self.resample_every


# ---------------------------------------------------------------------------
# integrator

@numba.njit(cache=True)
def _increment(x, dt, z, b, db, d2b, s, ds, d2s):
    sqdt = math.sqrt(dt)
    return (x
            + (b - 0.5 * s * ds) * dt
            + s * sqdt * z
            + 0.5 * s * ds * dt * z * z
            + dt * sqdt * (0.5 * b * ds + 0.5 * db * s + 0.25 * s * s * d2s) * z
            + dt * dt * (0.5 * b * db + 0.25 * d2b * s * s))


@numba.njit
def _milstein_kernel(b, db, d2b, s, ds, d2s, x, dt, z, lo, hi, every, out):
    """Advance ``x`` over all draws in ``z``; store every ``every``-th state.

    Returns the final state and the index of the first non-finite step
    (-1 when all steps are finite).
    """
    k = 0
    for i in range(z.size):
        x = _increment(x, dt, z[i], b(x), db(x), d2b(x), s(x), ds(x), d2s(x))
        if not math.isfinite(x):
            return x, i
        if x < lo:
            x = lo
        elif x > hi:
            x = hi
        if (i + 1) % every == 0:
            out[k] = x
            k += 1
    return x, -1


def _run_kernel(model, x, dt, z, every, out):
    args = (x, dt, z, model.clamp_lo, model.clamp_hi, every, out)
    if model._jitted is not None:
        try:
            return _milstein_kernel(*model._jitted, *args)
        except numba.core.errors.NumbaError:
            pass
    return _milstein_kernel.py_func(*model.functions, *args)


def milstein2_step(model: SDEModel, x: float, dt: float, z: float) -> float:
    """One step of the second Milstein scheme from ``x`` with normal draw ``z``.

    The result is clamped to ``[state_lo + eps, state_hi - eps]`` on every
    finite side of the state interval.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    y = _increment(float(x), float(dt), float(z),
                   model.drift(x), model.drift_d1(x), model.drift_d2(x),
                   model.diffusion(x), model.diffusion_d1(x), model.diffusion_d2(x))
    if not math.isfinite(y):
        raise SimulationError(f"non-finite state from x={x!r}", step=0)
    return min(max(y, model.clamp_lo), model.clamp_hi)


def integrate_path(model: SDEModel, x0: float, dt: float, z) -> np.ndarray:
    """Fine-grid trajectory driven by the given standard-normal draws.

    Returns ``len(z) + 1`` states starting with ``x0``.
    """
    z = np.ascontiguousarray(z, dtype=np.float64)
    out = np.empty(z.size + 1)
    out[0] = x0
    _, bad = _run_kernel(model, float(x0), float(dt), z, 1, out[1:])
    if bad >= 0:
        raise SimulationError(f"non-finite state at step {bad}", step=int(bad))
    return out


def path_rng(seed: int, index: int = 0) -> np.random.Generator:
    """Independent Philox stream for path ``index`` under master ``seed``."""
    ss = np.random.SeedSequence(seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(ss))


def default_x0(model: SDEModel, rng: np.random.Generator) -> float:
    """Uniform draw on the central 60% of a bounded state interval."""
    lo, hi = model.state_lo, model.state_hi
    if not (math.isfinite(lo) and math.isfinite(hi)):
        lo, hi = -1.0, 1.0
    w = hi - lo
    return float(rng.uniform(lo + 0.2 * w, hi - 0.2 * w))


def simulate_path(model: SDEModel, cfg: SimulationConfig, label="",
                  stream: int = 0) -> Path:
    rng = path_rng(cfg.seed, stream)
    x = default_x0(model, rng) if cfg.x0 is None else float(cfg.x0)
    every = cfg.resample_every
    obs = np.empty(cfg.n_obs + 1)
    obs[0] = x
    chunk = every * max(1, _CHUNK // every)
    done = 0
    while done < cfg.n_fine:
        m = min(chunk, cfg.n_fine - done)
        z = rng.standard_normal(m)
        k0 = done // every
        x, bad = _run_kernel(model, x, cfg.dt_fine, z, every,
                             obs[1 + k0: 1 + k0 + m // every])
        if bad >= 0:
            raise SimulationError(
                f"non-finite state at fine step {done + bad} of {label or model.name!r}",
                step=int(done + bad))
        done += m
    return Path(obs, cfg.delta, label)


# ---------------------------------------------------------------------------
# models used in the synthetic study

def linear_drift(rate, level, name=""):
    """``b(x) = rate * (level - x)``."""
    def b(x):
        return rate * (level - x)

    def db(x):
        return -rate

    def d2b(x):
        return 0.0
    return b, db, d2b


def quadratic_diffusion(a, c):
    """``sigma(x) = a + c x (1 - x)``."""
    def s(x):
        return a + c * x * (1.0 - x)

    def ds(x):
        return c * (1.0 - 2.0 * x)

    def d2s(x):
        return -2.0 * c
    return s, ds, d2s


def sqrt_diffusion(c):
    """``sigma(x) = sqrt(c x (1 - x))``, positive on (0, 1)."""
    def s(x):
        return math.sqrt(c * x * (1.0 - x))

    def ds(x):
        return c * (1.0 - 2.0 * x) / (2.0 * math.sqrt(c * x * (1.0 - x)))

    def d2s(x):
        sig = math.sqrt(c * x * (1.0 - x))
        d = c * (1.0 - 2.0 * x) / (2.0 * sig)
        return (-c - d * d) / sig
    return s, ds, d2s


DRIFTS = {
    "b1": lambda: linear_drift(2.0, 0.5),    # 1 - 2x
    "b2": lambda: linear_drift(1.5, 0.9),
    "b3": lambda: linear_drift(1.5, 0.5),
    "b4": lambda: linear_drift(5.0, 0.05),
}

# sigma1 = 0.5 + 2x(1-x) is positive between its roots (1 -+ sqrt 2)/2
_S1_LO = (1.0 - math.sqrt(2.0)) / 2.0
_S1_HI = (1.0 + math.sqrt(2.0)) / 2.0

DIFFUSIONS = {
    "s1": (lambda: quadratic_diffusion(0.5, 2.0), (_S1_LO, _S1_HI)),
    "s2": (lambda: sqrt_diffusion(0.55), (0.0, 1.0)),
    "s3": (lambda: sqrt_diffusion(0.1), (0.0, 1.0)),
    "s4": (lambda: sqrt_diffusion(0.8), (0.0, 1.0)),
}


def make_model(drift: str, diffusion: str, boundary_eps=1e-6) -> SDEModel:
    """Model from the synthetic table, e.g. ``make_model("b1", "s3")``.

    The state interval is the maximal interval on which the diffusion
    coefficient is positive.
    """
    b = DRIFTS[drift]()
    sfac, (lo, hi) = DIFFUSIONS[diffusion]
    return SDEModel(*b, *sfac(), state_lo=lo, state_hi=hi,
                    boundary_eps=boundary_eps, name=f"{drift}/{diffusion}")


SUITE = {
    "X1": ("b1", "s1"),
    "X2": ("b2", "s2"),
    "X3": ("b2", "s2"),
    "X4": ("b2", "s3"),
    "X5": ("b1", "s3"),
    "X6": ("b3", "s2"),
    "X7": ("b3", "s2"),
    "X8": ("b4", "s4"),
    "X10": ("b1", "s1"),
}

PRESETS = {
    # dt = 1e-4 resampled at 0.1 gives N = 500 observations
    "full": dict(dt_fine=1e-4, n_fine=500_000, resample_every=1000),
    # quick variant, N = 50
    "short": dict(dt_fine=1e-4, n_fine=50_000, resample_every=1000),
}


def synthetic_suite(seed: int, dt_fine=1e-4, n_fine=500_000,
                    resample_every=1000) -> list[Path]:
    """The ten synthetic paths ``X1 .. X10``.

    Path ``Xi`` uses stream ``i`` of ``seed``; ``X9`` is the reflection
    ``1 - X1`` of the resampled ``X1`` and is not simulated.
    """
    paths = {}
    for label, (b, s) in SUITE.items():
        cfg = SimulationConfig(dt_fine=dt_fine, n_fine=n_fine,
                               resample_every=resample_every, seed=seed)
        paths[label] = simulate_path(make_model(b, s), cfg, label=label,
                                     stream=int(label[1:]))
    x1 = paths["X1"]
    paths["X9"] = Path(1.0 - x1.values, x1.delta, "X9")
    return [paths[f"X{i}"] for i in range(1, 11)]


# ---------------------------------------------------------------------------
# invariant law

def invariant_density(model: SDEModel, grid, tol=1e-10, shrink=0.0) -> np.ndarray:
    """Stationary density ``m(x) / C0`` of an ergodic diffusion on ``grid``.

    ``m`` is the speed density ``exp(2 int b/sigma^2) / sigma^2``; both the
    inner integral and the normalising constant ``C0`` use adaptive
    Gauss-Kronrod quadrature with absolute and relative tolerance ``tol``.
    The rule never evaluates the endpoints, so integrable singularities
    there are handled by the adaptive extrapolation; ``shrink > 0`` pulls
    finite endpoints inwards instead, at the cost of the truncated mass.
    """
    grid = np.asarray(grid, dtype=np.float64)
    l, r = model.state_lo, model.state_hi
    if np.any(grid <= l) or np.any(grid >= r):
        raise ValueError("grid must lie strictly inside the state interval")
    lo = l + shrink if math.isfinite(l) else -math.inf
    hi = r - shrink if math.isfinite(r) else math.inf
    if math.isfinite(l) and math.isfinite(r):
        ref = 0.5 * (l + r)
    elif math.isfinite(l):
        ref = l + 1.0
    elif math.isfinite(r):
        ref = r - 1.0
    else:
        ref = 0.0

    b, s = model.drift, model.diffusion

    def rate(y):
        return 2.0 * b(y) / s(y) ** 2

    def log_scale(x):
        # pieces shrink geometrically towards x until they are no longer
        # than the distance from x to the nearest boundary, which keeps
        # each piece free of the boundary singularity
        gap = x - ref
        dist = min(x - l, r - x)
        n_pieces = 1
        if gap != 0 and math.isfinite(dist):
            n_pieces += min(60, max(0, math.ceil(math.log2(abs(gap) / dist))))
        cuts = [ref] + [x - gap * 0.5 ** k for k in range(1, n_pieces)] + [x]
        total = 0.0
        with warnings.catch_warnings():
            # pieces a few thousand ulps wide cannot meet tol; keep the
            # best estimate and leave warnings-as-errors to the outer rule
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            for a, c in zip(cuts[:-1], cuts[1:]):
                total += integrate.quad(rate, a, c, epsabs=tol, epsrel=tol, limit=200)[0]
        return total

    def log_m(x):
        return log_scale(x) - 2.0 * math.log(abs(s(x)))

    offset = log_m(ref)

    def m(x):
        if not (lo < x < hi) or s(x) == 0.0:
            # endpoint reached through rounding: a null set for the integral
            return 0.0
        return math.exp(log_m(x) - offset)

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            c0, _ = integrate.quad(m, lo, hi, epsabs=tol, epsrel=tol, limit=500)
        except (integrate.IntegrationWarning, OverflowError) as exc:
            raise ErgodicityError(f"speed measure is not integrable: {exc}") from exc
    if not (math.isfinite(c0) and c0 > 0):
        raise ErgodicityError(f"speed measure integral is {c0}")
    return np.array([m(x) for x in grid]) / c0
