"""Special functions: frozen values, closed forms, branch agreement.

The frozen constants below were produced by an independent
arbitrary-precision implementation of the defining series (mpmath,
50 digits) and are pinned here to catch silent regressions in the
evaluation strategy, not just in the math.
"""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from refstable.errors import OrderUnsupported
from refstable.specfun import (AlphaParams, besselJ_alpha, calJ, func_V,
                               g_alpha, hatJ, hatJ_first_zero, hatJ_scaled,
                               poly_P)


class TestFrozenValues:
    # alpha = 3/2 throughout
    CASES = [
        (lambda p: calJ(0.0, p), 1.1077321674324724),
        (lambda p: calJ(1.0, p), 0.4393591065111716),
        (lambda p: calJ(1.0, p, k=1), -0.7826438338489097),
        (lambda p: calJ(1.0, p, k=2), 0.1919618586851577),
        (lambda p: hatJ(0.0, p), 0.3732821739073952),
        (lambda p: hatJ(1.0, p), 0.6693886089446758),
        (lambda p: g_alpha(1.0, p), -0.0366798908124514),
        (lambda p: g_alpha(0.5, p), 0.4437702811185626),
    ]

    @pytest.mark.parametrize("fn,want", CASES)
    def test_value(self, params, fn, want):
        assert fn(params) == pytest.approx(want, rel=1e-12)

    def test_calJ_at_zero_is_reciprocal_gamma(self, params):
        assert calJ(0.0, params) == pytest.approx(
            1.0 / params.gamma_one_plus, rel=1e-14)

    def test_hatJ_boundary_closed_form(self, params):
        from scipy.special import gamma
        want = gamma(2.0 / 3.0) * np.sin(2.0 * np.pi / 3.0) / np.pi
        assert hatJ(0.0, params) == pytest.approx(want, rel=1e-14)

    def test_hatJ_first_zero(self, params):
        z = hatJ_first_zero(params)
        assert z == pytest.approx(2.4183991523122905, rel=1e-14)
        assert abs(hatJ(z, params)) < 1e-13


class TestEnvelopeSplit:
    """hatJ = e^{-x cos pa} * hatJ_scaled; the scaled factor is bounded."""

    def test_split_is_exact(self, params):
        x = np.linspace(0.0, 40.0, 97)
        lhs = hatJ(x, params)
        rhs = np.exp(-x * params.cos_pa) * hatJ_scaled(x, params)
        assert np.allclose(lhs, rhs, rtol=1e-15, atol=0.0)

    @given(st.floats(min_value=0.0, max_value=500.0),
           st.integers(min_value=0, max_value=3))
    def test_scaled_factor_bounded(self, x, m):
        p = AlphaParams(1.5)
        bound = p.gamma_inv_alpha / np.pi
        assert abs(hatJ_scaled(x, p, m=m)) <= bound * (1.0 + 1e-12)

    def test_rejects_negative_order(self, params):
        with pytest.raises(OrderUnsupported):
            hatJ_scaled(1.0, params, m=-1)


class TestBranchAgreement:
    """Series and asymptotic lanes must agree across the crossover."""

    @pytest.mark.parametrize("alpha", [1.1, 1.5, 1.9])
    @pytest.mark.parametrize("k", [0, 1, 2])
    def test_seam_window(self, alpha, k):
        from refstable.specfun import _asym, _series_ld
        p = AlphaParams(alpha)
        xs = np.linspace(18.0, 22.0, 9)
        s = _series_ld(xs, p, k, 320)
        a = _asym(xs, p, k)
        assert np.abs(s - a).max() < 1e-8

    def test_calJ_continuous_at_crossover(self, params):
        xl = np.nextafter(20.0, 0.0)
        xr = np.nextafter(20.0, 21.0)
        assert abs(calJ(xl, params) - calJ(xr, params)) < 5e-9


class TestOrdersAndDomain:
    def test_calJ_rejects_high_order(self, params):
        with pytest.raises(OrderUnsupported):
            calJ(1.0, params, k=3)

    def test_calJ_rejects_negative_argument(self, params):
        with pytest.raises(ValueError):
            calJ(-0.5, params)

    def test_alpha_domain(self):
        for bad in (1.0, 2.0, 0.5, 2.5):
            with pytest.raises(ValueError):
                AlphaParams(bad)


class TestBesselJ:
    def test_small_x_series_value(self, params):
        # direct check of the defining series at x = 0.1
        import math

        from scipy.special import gamma
        a = params.alpha
        want = a * sum((-0.1 ** a) ** m / (math.factorial(m)
                                           * gamma(m + 1.0 / a))
                       for m in range(8))
        assert besselJ_alpha(0.1, params) == pytest.approx(want, rel=1e-12)

    def test_branch_continuity_at_one(self, params):
        xl = np.nextafter(1.0, 0.0)
        xr = np.nextafter(1.0, 2.0)
        rel = abs(besselJ_alpha(xl, params) - besselJ_alpha(xr, params))
        assert rel < 1e-12

    def test_decay_envelope(self, params):
        # |J(x)| = O(x^{(alpha-2)/4}) going out
        xs = np.array([50.0, 200.0, 800.0])
        vals = np.abs(besselJ_alpha(xs, params))
        env = xs ** ((params.alpha - 2.0) / 4.0)
        assert np.all(vals < 3.0 * env)


class TestKernelPolynomials:
    def test_frozen_values(self, params):
        assert func_V(3, 0.5, params) == pytest.approx(
            0.2789417680172325, rel=1e-9)
        assert func_V(0, 0.0, params) == pytest.approx(
            0.3369787254373929, rel=1e-9)

    def test_poly_P_degree_zero_is_constant(self, params):
        v0 = poly_P(0, 0.3, params)
        v1 = poly_P(0, 7.0, params)
        assert v0 == pytest.approx(v1, rel=1e-14)
        assert v0 == pytest.approx(1.0 / params.gamma_one_plus, rel=1e-12)

    def test_func_V_routes_agree(self, params):
        # quadrature vs series realization of the same function
        for n, y in [(0, 0.5), (2, 1.0), (4, 0.25)]:
            q = func_V(n, y, params, method="quad")
            s = func_V(n, y, params, method="series")
            assert q == pytest.approx(s, rel=1e-8)


class TestGAlpha:
    def test_flags_hopeless_cancellation(self, params):
        from refstable.errors import CancellationOverflow
        with pytest.raises(CancellationOverflow):
            g_alpha(50.0, params, amp_budget=1e12)

    def test_budget_extends_range(self, params):
        # the longdouble lane keeps ~18 digits; at x=8 amplification is
        # ~1e8, leaving ~1e-10 relative headroom
        v = g_alpha(8.0, params)
        assert np.isfinite(v)
