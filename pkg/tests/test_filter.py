import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from dsft.core import FrequencyBand
from dsft.filter import (
    INV_SQRT_2PI,
    FilterParams,
    gaussian_decay_bound,
    gaussian_eval,
    gaussian_fourier_coeff,
    modulated_fourier_coeff,
    passband_plan,
    select_params,
    guaranteed_kappa,
)


def periodic_gaussian_direct(x, c1, images=10):
    """Independent oracle: the periodization summed over a generous fixed range."""
    return sum(math.exp(-((x - 2 * k * math.pi) ** 2) / (2 * c1 * c1)) for k in range(-images, images + 1)) / c1


def quad_coeff(omega, c1):
    # g is even, so (1/2pi) int g(x) exp(-i w x) dx = (1/pi) int_0^pi g(x) cos(w x) dx
    val, _ = integrate.quad(lambda x: periodic_gaussian_direct(x, c1) * math.cos(omega * x), 0, math.pi,
                            points=[min(8 * c1, 3.0)], limit=400, epsabs=1e-14, epsrel=1e-13)
    return val / math.pi


class TestGaussianEval:
    def test_peak_value(self):
        assert gaussian_eval(0.0, 0.1) == pytest.approx(10.0, rel=1e-15)

    def test_at_pi_by_symmetry(self):
        c1 = 0.5
        expect = 2 / c1 * sum(math.exp(-((math.pi + 2 * k * math.pi) ** 2) / (2 * c1 * c1)) for k in range(10))
        assert gaussian_eval(math.pi, c1) == pytest.approx(expect, rel=1e-13)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-math.pi, math.pi), st.floats(0.001, 1.0))
    def test_even_and_matches_direct(self, x, c1):
        assert gaussian_eval(x, c1) == pytest.approx(gaussian_eval(-x, c1), rel=1e-14)
        ref = periodic_gaussian_direct(x, c1)
        assert gaussian_eval(x, c1) == pytest.approx(ref, rel=1e-13, abs=1e-300)

    def test_array_input(self):
        xs = np.linspace(-math.pi, math.pi, 7)
        assert gaussian_eval(xs, 0.3).shape == (7,)

    def test_rejects_nonpositive_width(self):
        with pytest.raises(ValueError):
            gaussian_eval(0.0, 0.0)


class TestFourierCoeff:
    def test_dc(self):
        assert gaussian_fourier_coeff(0, 0.123) == pytest.approx(0.3989422804, abs=1e-10)

    def test_formula_example(self):
        assert gaussian_fourier_coeff(10, 0.1) == pytest.approx(0.2419707245, abs=1e-9)

    @pytest.mark.parametrize("omega", [0, 1, 7])
    def test_quadrature(self, omega):
        assert abs(gaussian_fourier_coeff(omega, 0.05) - quad_coeff(omega, 0.05)) < 1e-10

    def test_monotone_and_below_half(self):
        c1 = select_params(4096, 1).c1
        vals = gaussian_fourier_coeff(np.arange(0, 4097), c1)
        assert np.all(np.diff(vals) < 0)
        assert np.all(vals < 0.5) and vals[0] == pytest.approx(INV_SQRT_2PI)

    def test_modulated(self):
        assert modulated_fourier_coeff(0, 4, 0.01) == gaussian_fourier_coeff(4, 0.01)
        assert modulated_fourier_coeff(5, -5, 0.01) == pytest.approx(INV_SQRT_2PI)
        expect = INV_SQRT_2PI * math.exp(-0.01 ** 2 * 103 ** 2 / 2)
        assert modulated_fourier_coeff(100, 3, 0.01) == pytest.approx(expect, rel=1e-14)


class TestDecayBound:
    def test_plug_in(self):
        assert gaussian_decay_bound(0.0, 0.1) == pytest.approx(30 + INV_SQRT_2PI)
        assert gaussian_decay_bound(math.pi, 0.2) == pytest.approx(
            (15 + INV_SQRT_2PI) * math.exp(-math.pi ** 2 / 0.08))

    def test_dominates(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            x = rng.uniform(-math.pi, math.pi)
            c1 = rng.uniform(1e-3, 1.0)
            assert gaussian_eval(x, c1) <= gaussian_decay_bound(x, c1)


class TestSelectParams:
    def test_worked_example(self):
        p = select_params(4096, 1)
        assert p.beta == 6
        # independent evaluation of beta * sqrt(ln N) / N
        assert p.c1 == pytest.approx(6 * math.sqrt(math.log(4096)) / 4096, rel=1e-15)
        assert p.c1 == pytest.approx(0.0042246, abs=1e-7)
        assert math.ceil(6 / (math.sqrt(2) * math.pi) * math.log(4096)) == 12
        assert p.kappa == 13 == guaranteed_kappa(4096, 1)

    def test_boundary_r(self):
        n = 4096
        p = select_params(n, n / 36)
        assert p.beta == pytest.approx(math.sqrt(n))
        assert p.c1 == pytest.approx(math.sqrt(n * math.log(n)) / n)
        assert p.beta ** 2 == pytest.approx(n)

    @pytest.mark.parametrize("r", [0.5, 4096 / 36 + 1])
    def test_rejects_r(self, r):
        with pytest.raises(ValueError):
            select_params(4096, r)

    def test_rejects_small_n(self):
        with pytest.raises(ValueError):
            select_params(35)

    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            FilterParams(n=1024, r=1, beta=3, c1=0.01, tau=1 / 3, alpha=40, kappa=5)

    @pytest.mark.parametrize("n", [2**10, 2**12, 2**14])
    @pytest.mark.parametrize("r", [1, 2])
    def test_passband_flat(self, n, r):
        p = select_params(n, r)
        w = np.arange(-p.half_width, p.half_width + 1)
        vals = gaussian_fourier_coeff(w, p.c1)
        assert np.all((vals >= p.tau) & (vals <= INV_SQRT_2PI))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(36, 2**20), st.floats(1.0, 8.0))
    def test_invariants_hold(self, n, r):
        if r > n / 36:
            return
        try:
            p = select_params(n, r)
        except ValueError:
            # only when the alpha clamp makes the parameter set inadmissible
            return
        assert p.violations() == []


class TestPassbandPlan:
    def test_worked_example(self):
        plan = passband_plan(4096, 2.0)
        assert plan.half_width == 711
        assert plan.count == 3
        assert plan.centers[0] == -1336

    @settings(max_examples=20, deadline=None)
    @given(st.integers(36, 5000), st.floats(1.0, 3.0))
    def test_covers(self, n, r):
        if r > n / 36:
            return
        try:
            p = select_params(n, r)
        except ValueError:
            return
        plan = passband_plan(n, p)
        assert plan.covers(n)
        band = FrequencyBand(n)
        for w in band.frequencies()[:: max(1, n // 50)]:
            assert plan.band_of(int(w)) >= 0

    def test_minimal_alpha(self):
        plan = passband_plan(64, 1.0)
        assert plan.covers(64)
