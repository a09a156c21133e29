import math

import numpy as np
import pytest
import sympy as sp
from scipy import stats

from diffclust import sde
from diffclust.basis import gauss_legendre_rule
from diffclust.errors import ErgodicityError, SimulationError
from diffclust.sde import Path, SDEModel, SimulationConfig


def constant_model(b=0.0, s=0.0, **kw):
    return SDEModel(lambda x: b, lambda x: 0.0, lambda x: 0.0,
                    lambda x: s, lambda x: 0.0, lambda x: 0.0, **kw)


X1 = sde.make_model("b1", "s1")
X5 = sde.make_model("b1", "s3")


def milstein2_by_hand(b, db, d2b, s, ds, d2s, x, dt, z):
    return (x + (b - 0.5 * s * ds) * dt + s * math.sqrt(dt) * z + 0.5 * s * ds * dt * z ** 2
            + dt ** 1.5 * (0.5 * b * ds + 0.5 * db * s + 0.25 * s ** 2 * d2s) * z
            + dt ** 2 * (0.5 * b * db + 0.25 * d2b * s ** 2))


class TestStep:
    @pytest.mark.parametrize("z", [-3.0, 0.0, 0.4, 2.5])
    def test_zero_coefficients(self, z):
        assert sde.milstein2_step(constant_model(), 0.3, 1e-3, z) == 0.3

    @pytest.mark.parametrize("z", [-1.3, 0.7])
    def test_constant_sigma_is_euler(self, z):
        m = constant_model(s=0.4)
        assert sde.milstein2_step(m, 0.2, 1e-2, z) == pytest.approx(0.2 + 0.4 * 0.1 * z, abs=1e-15)

    def test_x1_midpoint_hand_value(self):
        # b=0, b'=-2, sigma=1, sigma'=0, sigma''=-4 at x=0.5:
        # 0.5 + 0.01 + 1e-6 * (-1 - 1) = 0.509998
        assert sde.milstein2_step(X1, 0.5, 1e-4, 1.0) == pytest.approx(0.509998, rel=1e-14)

    @pytest.mark.parametrize("x,z", [(0.3, -0.7), (0.81, 1.9), (-0.1, 0.05)])
    def test_x1_matches_transcription(self, x, z):
        b, db, d2b = 1 - 2 * x, -2.0, 0.0
        s, ds, d2s = 0.5 + 2 * x * (1 - x), 2 - 4 * x, -4.0
        want = milstein2_by_hand(b, db, d2b, s, ds, d2s, x, 1e-4, z)
        assert sde.milstein2_step(X1, x, 1e-4, z) == pytest.approx(want, rel=1e-14)

    @pytest.mark.parametrize("b,want", [(-100.0, 1e-6), (100.0, 1 - 1e-6)])
    def test_clamps_to_interval(self, b, want):
        m = constant_model(b=b, state_lo=0.0, state_hi=1.0)
        assert sde.milstein2_step(m, 0.5, 1.0, 0.0) == want

    def test_non_finite_raises(self):
        m = constant_model(b=math.inf)
        with pytest.raises(SimulationError):
            sde.milstein2_step(m, 0.0, 1e-3, 0.0)

    def test_kernel_reports_failing_step(self):
        m = SDEModel(lambda x: x * x * 1e3, lambda x: 2e3 * x, lambda x: 2e3,
                     lambda x: 0.0, lambda x: 0.0, lambda x: 0.0)
        with pytest.raises(SimulationError) as err:
            sde.integrate_path(m, 1.0, 1.0, np.zeros(50))
        assert err.value.step is not None and err.value.step < 50


class TestModels:
    @pytest.mark.parametrize("b", ["b1", "b2", "b3", "b4"])
    @pytest.mark.parametrize("s", ["s1", "s2", "s3", "s4"])
    def test_analytic_derivatives(self, b, s):
        assert sde.make_model(b, s).check_derivatives() < 1e-6

    @pytest.mark.parametrize("s", ["s1", "s2", "s3", "s4"])
    def test_diffusion_positive_inside(self, s):
        m = sde.make_model("b1", s)
        xs = np.linspace(m.clamp_lo, m.clamp_hi, 1001)
        assert all(m.diffusion(x) > 0 for x in xs)

    def test_b4_zero_at_level(self):
        assert sde.make_model("b4", "s4").drift(0.05) == 0.0

    def test_finite_difference_constructor(self):
        fd = SDEModel.from_functions(lambda x: 1 - 2 * x,
                                     lambda x: 0.5 + 2 * x * (1 - x))
        for x in np.linspace(-0.1, 1.1, 13):
            assert fd.drift_d1(x) == pytest.approx(-2.0, rel=1e-8)
            assert fd.diffusion_d1(x) == pytest.approx(2 - 4 * x, abs=1e-8)
            assert fd.diffusion_d2(x) == pytest.approx(-4.0, rel=1e-5)

    def test_python_fallback_matches_compiled(self):
        class Opaque:
            # not compilable by numba, forces the interpreted loop
            def __call__(self, x):
                return 1 - 2 * x
        compiled = sde.integrate_path(X1, 0.4, 1e-3, np.linspace(-1, 1, 200))
        m = SDEModel(Opaque(), X1.drift_d1, X1.drift_d2, X1.diffusion,
                     X1.diffusion_d1, X1.diffusion_d2, state_lo=X1.state_lo,
                     state_hi=X1.state_hi)
        interpreted = sde.integrate_path(m, 0.4, 1e-3, np.linspace(-1, 1, 200))
        np.testing.assert_allclose(interpreted, compiled, rtol=1e-13)

    def test_bad_eps(self):
        with pytest.raises(ValueError):
            constant_model(state_lo=0.0, state_hi=1.0, boundary_eps=0.6)


class TestSimulate:
    def test_lengths_and_mesh(self):
        cfg = SimulationConfig(dt_fine=1e-4, n_fine=50_000, resample_every=1000, seed=3)
        p = sde.simulate_path(X1, cfg)
        assert len(p) == 51
        assert p.delta == pytest.approx(0.1, abs=1e-16)

    def test_zero_model_constant(self):
        cfg = SimulationConfig(dt_fine=1e-3, n_fine=1000, resample_every=10, x0=0.42)
        p = sde.simulate_path(constant_model(), cfg)
        assert np.all(p.values == 0.42)

    def test_determinism(self):
        cfg = SimulationConfig(dt_fine=1e-3, n_fine=5000, resample_every=10, seed=7)
        a, b = sde.simulate_path(X1, cfg), sde.simulate_path(X1, cfg)
        c = sde.simulate_path(X1, SimulationConfig(dt_fine=1e-3, n_fine=5000,
                                                   resample_every=10, seed=8))
        assert np.array_equal(a.values, b.values)
        assert not np.array_equal(a.values, c.values)

    def test_chunking_is_invisible(self, monkeypatch):
        cfg = SimulationConfig(dt_fine=1e-3, n_fine=6000, resample_every=20, seed=1)
        whole = sde.simulate_path(X5, cfg)
        monkeypatch.setattr(sde, "_CHUNK", 100)
        pieces = sde.simulate_path(X5, cfg)
        # chunking changes the draw batches but not the stream
        assert np.array_equal(whole.values, pieces.values)

    def test_observations_are_fine_states(self):
        cfg = SimulationConfig(dt_fine=1e-3, n_fine=300, resample_every=30, seed=2, x0=0.5)
        p = sde.simulate_path(X5, cfg)
        z = sde.path_rng(2, 0).standard_normal(300)
        fine = sde.integrate_path(X5, 0.5, 1e-3, z)
        np.testing.assert_array_equal(p.values, fine[::30])

    @pytest.mark.parametrize("name", ["s2", "s3", "s4"])
    def test_clamped_inside(self, name):
        m = sde.make_model("b4", name)
        cfg = SimulationConfig(dt_fine=1e-2, n_fine=20_000, resample_every=1, seed=5)
        p = sde.simulate_path(m, cfg)
        assert p.values.min() >= m.clamp_lo and p.values.max() <= m.clamp_hi

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SimulationConfig(n_fine=1001, resample_every=10)
        assert SimulationConfig().n_obs == 500
        assert SimulationConfig().delta == pytest.approx(0.1, abs=1.5e-17)


class TestSuite:
    @pytest.fixture(scope="class")
    @staticmethod
    def suite():
        return sde.synthetic_suite(11, **sde.PRESETS["short"])

    def test_labels_and_shapes(self, suite):
        assert [p.label for p in suite] == [f"X{i}" for i in range(1, 11)]
        assert len({len(p) for p in suite}) == 1
        assert len({p.delta for p in suite}) == 1

    def test_x9_reflects_x1(self, suite):
        assert np.all(suite[8].values + suite[0].values == 1.0)

    def test_x1_x10_differ_from_start(self, suite):
        assert suite[0].values[0] != suite[9].values[0]

    def test_same_model_pairs_use_distinct_streams(self, suite):
        assert not np.array_equal(suite[1].values, suite[2].values)
        assert not np.array_equal(suite[5].values, suite[6].values)

    def test_initial_values_in_central_band(self, suite):
        for p, (b, s) in zip(suite, [sde.SUITE[f"X{i}"] for i in (1, 2, 3, 4, 5, 6, 7, 8)]):
            m = sde.make_model(b, s)
            w = m.state_hi - m.state_lo
            assert m.state_lo + 0.2 * w <= p.values[0] <= m.state_hi - 0.2 * w


class TestInvariantDensity:
    def test_beta_form_derived_symbolically(self):
        x = sp.symbols("x", positive=True)
        integrand = 2 * (1 - 2 * x) / (sp.Rational(1, 10) * x * (1 - x))
        antider = sp.integrate(sp.apart(integrand, x), x)
        assert sp.simplify(sp.diff(antider - 20 * sp.log(x * (1 - x)), x)) == 0
        m = sp.exp(20 * sp.log(x) + 20 * sp.log(1 - x)) / (sp.Rational(1, 10) * x * (1 - x))
        assert sp.simplify(m / (x * (1 - x)) ** 19) == 10

    def test_matches_beta_20_20(self):
        grid = np.linspace(0.1, 0.9, 81)
        got = sde.invariant_density(X5, grid)
        want = stats.beta(20, 20).pdf(grid)
        assert np.max(np.abs(got / want - 1)) < 1e-4

    @pytest.mark.parametrize("b", ["b1", "b2", "b3", "b4"])
    @pytest.mark.parametrize("s", ["s2", "s3", "s4"])
    def test_beta_family(self, b, s):
        # b = k(theta - x), sigma^2 = c x(1-x)  =>  Beta(2k theta/c, 2k(1-theta)/c)
        k, theta = {"b1": (2.0, 0.5), "b2": (1.5, 0.9), "b3": (1.5, 0.5), "b4": (5.0, 0.05)}[b]
        c = {"s2": 0.55, "s3": 0.1, "s4": 0.8}[s]
        law = stats.beta(2 * k * theta / c, 2 * k * (1 - theta) / c)
        grid = np.linspace(0.05, 0.95, 19)
        got = sde.invariant_density(sde.make_model(b, s), grid)
        np.testing.assert_allclose(got, law.pdf(grid), rtol=1e-7)
        assert np.all(got >= 0)

    def test_integrates_to_one(self):
        m = sde.make_model("b3", "s2")
        breaks = np.concatenate([np.geomspace(1e-12, 0.5, 40),
                                 1 - np.geomspace(1e-12, 0.5, 40)[::-1]])
        nodes, weights = gauss_legendre_rule(breaks, 16)
        total = float(np.sum(sde.invariant_density(m, nodes) * weights))
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_vanishing_sigma_boundary(self):
        # sigma1 vanishes linearly at its roots; the density must decay, not blow up
        m = sde.make_model("b1", "s1")
        near = [m.state_lo + 1e-12, m.state_hi - 1e-12]
        assert np.all(sde.invariant_density(m, near) < 1e-100)

    def test_symmetric_model(self):
        m = sde.make_model("b3", "s2")
        grid = np.linspace(0.05, 0.45, 9)
        np.testing.assert_allclose(sde.invariant_density(m, grid),
                                   sde.invariant_density(m, 1 - grid), rtol=1e-8)

    def test_precision_stable(self):
        grid = np.linspace(0.1, 0.9, 17)
        a = sde.invariant_density(X5, grid, tol=1e-10)
        b = sde.invariant_density(X5, grid, tol=5e-11)
        assert np.max(np.abs(a - b)) < 1e-8

    def test_unbounded_ou(self):
        ou = SDEModel(lambda x: -x, lambda x: -1.0, lambda x: 0.0,
                      lambda x: 1.0, lambda x: 0.0, lambda x: 0.0)
        grid = np.linspace(-2, 2, 9)
        np.testing.assert_allclose(sde.invariant_density(ou, grid),
                                   stats.norm(0, math.sqrt(0.5)).pdf(grid), rtol=1e-7)

    def test_brownian_motion_not_ergodic(self):
        bm = SDEModel(lambda x: 0.0, lambda x: 0.0, lambda x: 0.0,
                      lambda x: 1.0, lambda x: 0.0, lambda x: 0.0)
        with pytest.raises(ErgodicityError):
            sde.invariant_density(bm, [0.0])

    def test_grid_outside(self):
        with pytest.raises(ValueError):
            sde.invariant_density(X5, [0.0, 0.5])


class TestPath:
    def test_invariants(self):
        with pytest.raises(ValueError):
            Path([1.0], 0.1)
        with pytest.raises(ValueError):
            Path([1.0, np.nan], 0.1)
        with pytest.raises(ValueError):
            Path([1.0, 2.0], 0.0)

    def test_immutable(self):
        p = Path([1.0, 2.0], 1.0)
        with pytest.raises(ValueError):
            p.values[0] = 3.0
