import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from refstable.errors import NoDecayMetadata, NonConvergence
from refstable.numerics import (DecayHint, Grid, GridFunction,
                                integrate_semiinfinite,
                                integrate_vertical_line,
                                truncation_from_decay)


class TestGrid:
    def test_linear(self):
        g = Grid.linear(0.0, 2.0, 5)
        assert np.allclose(g.points, [0.0, 0.5, 1.0, 1.5, 2.0])

    def test_logarithmic_endpoints(self):
        g = Grid.logarithmic(1e-3, 10.0, 40)
        assert g.points[0] == pytest.approx(1e-3)
        assert g.points[-1] == pytest.approx(10.0)
        # log spacing: constant ratio
        r = g.points[1:] / g.points[:-1]
        assert np.allclose(r, r[0])

    def test_rejects_bad_bounds(self):
        with pytest.raises(ValueError):
            Grid.linear(2.0, 1.0, 5)
        with pytest.raises(ValueError):
            Grid.logarithmic(0.0, 1.0, 5)


class TestGridFunction:
    def test_interpolates_smooth_function(self):
        g = Grid.linear(0.0, 6.0, 601)
        gf = GridFunction(g, np.cos(g.points))
        xs = np.array([0.37, 1.234, 5.1])
        assert np.abs(gf(xs) - np.cos(xs)).max() < 1e-6

    def test_l2_norm_matches_closed_form(self):
        # trapezoid norm over the sampled range; h^2 accuracy
        g = Grid.linear(0.0, 40.0, 4001)
        gf = GridFunction(g, np.exp(-g.points))
        assert gf.l2_norm() == pytest.approx(1.0 / np.sqrt(2.0), rel=1e-4)


class TestSemiInfinite:
    def test_exponential(self):
        r = integrate_semiinfinite(lambda x: np.exp(-x),
                                   DecayHint("stretched-exponential",
                                             rate=1.0, power=1.0),
                                   tol=1e-10)
        assert r.value == pytest.approx(1.0, abs=1e-9)

    def test_gaussian(self):
        r = integrate_semiinfinite(
            lambda x: np.exp(-x * x),
            DecayHint("stretched-exponential", rate=1.0, power=2.0),
            tol=1e-10)
        assert r.value == pytest.approx(np.sqrt(np.pi) / 2.0, abs=1e-9)

    def test_error_estimate_is_honest(self):
        r = integrate_semiinfinite(lambda x: np.exp(-x) * np.cos(3 * x),
                                   DecayHint("stretched-exponential",
                                             rate=1.0, power=1.0),
                                   tol=1e-9)
        assert abs(r.value - 0.1) <= max(10.0 * r.abs_error_estimate, 1e-8)

    def test_requires_metadata(self):
        with pytest.raises(NoDecayMetadata):
            integrate_semiinfinite(lambda x: np.exp(-x), None, tol=1e-8)


@given(st.floats(min_value=1e-12, max_value=1e-4),
       st.floats(min_value=0.5, max_value=3.0))
def test_truncation_grows_as_tol_shrinks(tol, rate):
    loose = truncation_from_decay(0.0, rate, 1e-2)
    tight = truncation_from_decay(0.0, rate, tol)
    assert tight >= loose


def test_vertical_line_inverts_gamma():
    # Mellin pair: Gamma(s) <-> e^{-x}
    from refstable.mellin import MellinSymbol

    sym = MellinSymbol("gamma", ((1.0, 0.0, +1),))
    for x in (0.5, 1.0, 2.5):
        r = integrate_vertical_line(sym, x, 1.5, tol=1e-10)
        assert r.value == pytest.approx(np.exp(-x), rel=1e-9)
