"""Transition kernel: both representations, Markov structure, guards.

Kernel values frozen from an arbitrary-precision evaluation of the
series representation (mpmath, 40 digits).
"""

import numpy as np
import pytest

from refstable.errors import NonConvergence, OrderUnsupported
from refstable.heatkernel import (KernelRequest, bessel_kernel_Q,
                                  entrance_density, kernel, kernel_apply,
                                  kernel_integral, kernel_profile,
                                  kernel_series)
from refstable.specfun import AlphaParams, calJ


FROZEN = [
    # (t, x, y, value)
    (1.0, 1.0, 1.0, 0.328810975453),
    (0.5, 1.0, 1.0, 0.429100044600),
    (0.5, 0.5, 0.5, 0.570237647511),
    (2.0, 1.0, 0.5, 0.214779854559),
    (0.5, 1.0, 2.0, 0.429141445063),
]


class TestRepresentations:
    @pytest.mark.parametrize("t,x,y,want", FROZEN)
    def test_integral_rep(self, params, t, x, y, want):
        kv = kernel_integral(t, x, y, params, 1e-10, (0, 0, 0))
        assert kv.value == pytest.approx(want, abs=5e-10)

    @pytest.mark.parametrize("t,x,y,want", FROZEN)
    def test_series_rep(self, params, t, x, y, want):
        kv = kernel_series(t, x, y, params, 1e-10)
        assert kv.value == pytest.approx(want, abs=5e-10)

    def test_facade_auto_dispatch(self, params):
        # large t small x,y goes to the series; the integral must agree
        ks = kernel(KernelRequest(2.0, 1.0, 0.5, params))
        ki = kernel(KernelRequest(2.0, 1.0, 0.5, params, rep="integral"))
        assert ks.value == pytest.approx(ki.value, abs=1e-8)

    def test_series_refuses_derivatives(self, params):
        with pytest.raises(OrderUnsupported):
            kernel(KernelRequest(1.0, 1.0, 1.0, params, rep="series",
                                 orders=(1, 0, 0)))

    def test_time_derivative_sign(self, params):
        # d/dt of the kernel at its bulk is a genuine number: compare a
        # central difference of values against the derivative order
        t, x, y = 0.8, 1.0, 1.0
        d = kernel_integral(t, x, y, params, 1e-11, (1, 0, 0)).value
        h = 1e-4
        up = kernel_integral(t + h, x, y, params, 1e-12, (0, 0, 0)).value
        dn = kernel_integral(t - h, x, y, params, 1e-12, (0, 0, 0)).value
        assert d == pytest.approx((up - dn) / (2 * h), rel=1e-5)


class TestMarkovStructure:
    def test_mass_spot(self, params):
        # one (t, x) pair here; the acceptance suite sweeps the rest
        t, x = 0.5, 1.0
        sc = t ** (1.0 / params.alpha)
        ys = np.linspace(0.0, x + 6.0 * sc, 1200)
        vals, errs = kernel_profile(t, x, ys, params, tol=1e-9)
        mass = np.trapezoid(vals, ys)
        assert mass == pytest.approx(1.0, abs=2e-6)

    def test_kernel_nonnegative_in_bulk(self, params):
        t, x = 0.5, 1.0
        ys = np.linspace(0.0, 3.0, 301)
        vals, _ = kernel_profile(t, x, ys, params, tol=1e-9)
        assert vals.min() > -1e-8

    def test_eigenfunction_flow_spot(self, params):
        q, t, x = 1.0, 0.5, 1.0
        got = kernel_apply(lambda y: calJ(q * y, params), t, x, params)
        want = np.exp(-q ** params.alpha * t) * calJ(q * x, params)
        assert got == pytest.approx(want, rel=1e-6)


class TestGuards:
    def test_overflow_guard_far_outside_support(self, params):
        with pytest.raises(NonConvergence):
            kernel_integral(0.5, 0.5, 30.0, params, 1e-10, (0, 0, 0))

    def test_error_estimate_covers_true_error(self, params):
        t, x, y, want = FROZEN[1]
        kv = kernel_integral(t, x, y, params, 1e-10, (0, 0, 0))
        assert abs(kv.value - want) <= max(10.0 * kv.error_estimate, 1e-9)


class TestReferenceSemigroup:
    def test_mass_one(self, params):
        t, x = 0.5, 1.0
        ys = np.linspace(1e-6, 12.0, 4801)
        vals = bessel_kernel_Q(t, x, ys, params)
        assert np.trapezoid(vals, ys) == pytest.approx(1.0, abs=1e-5)

    def test_self_adjoint_kernel(self, params):
        # symmetry of the density w.r.t. Lebesgue measure
        a = bessel_kernel_Q(0.7, 1.0, np.array([2.0]), params)[0]
        b = bessel_kernel_Q(0.7, 2.0, np.array([1.0]), params)[0]
        assert a == pytest.approx(b, rel=1e-12)


class TestEntranceLaw:
    def test_mass_and_scaled_moment(self, params):
        t = 1.0
        ys = np.linspace(1e-6, 8.0, 3201)
        vals = np.array([entrance_density(t, y, params, 1e-10)
                         for y in ys])
        mass = np.trapezoid(vals, ys)
        mom = np.trapezoid(ys * vals, ys)
        assert mass == pytest.approx(1.0, abs=1e-6)
        # first moment equals the fixed Mellin moment at s = 2
        assert mom == pytest.approx(1.1077321674324724, abs=1e-6)

    def test_self_similarity(self, params):
        # G_t(y) = t^{-1/alpha} G_1(y t^{-1/alpha})
        t, y = 0.5, 0.8
        sc = t ** (-1.0 / params.alpha)
        lhs = entrance_density(t, y, params, 1e-10)
        rhs = sc * entrance_density(1.0, y * sc, params, 1e-10)
        assert lhs == pytest.approx(rhs, rel=1e-8)


class TestAlphaNearTwo:
    def test_reflected_gaussian_limit(self):
        p = AlphaParams(1.99)
        t, x, y = 1.0, 1.0, 1.0
        val = kernel_integral(t, x, y, p, 1e-9, (0, 0, 0)).value
        s2 = 2.0 * t
        gauss = (np.exp(-(x - y) ** 2 / (2 * s2))
                 + np.exp(-(x + y) ** 2 / (2 * s2))) \
            / np.sqrt(2 * np.pi * s2)
        assert val == pytest.approx(gauss, rel=0.02)
