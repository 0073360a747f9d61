"""Mellin multiplier catalogue, inversion engine, and densities.

Every multiplier in the catalogue is a ratio of Gamma factors, optionally
times c * rho^s.  Each symbol carries its strip of validity and decay
metadata derived from Stirling's formula: for
|prod Gamma(p_j s + q_j)^{eps_j}| on the line Re s = a,

    exponential rate  = (pi/2) * sum_j eps_j |p_j|
    polynomial power  = sum_j eps_j (p_j a + Re q_j - 1/2)

so truncation points for inversion integrals follow mechanically.  The
two shipped densities come from inversion at abscissa a = 1/2:

* ``lambda_alpha`` -- the multiplicative-kernel density behind the
  intertwining operator (the law of the exponential-type variable whose
  Mellin moments are M_Lambda);
* ``lambda_X``     -- the entrance-law density at unit time;
* ``lambda_G``     -- closed form alpha e^{-y^alpha} / Gamma(1/alpha),
  no inversion needed.

One symbol in the catalogue (M_hatH) *grows* along vertical lines; it is
catalogued for algebraic checks only and the inversion engine refuses it,
by construction, through its nonpositive decay rate.
"""

from __future__ import annotations

import dataclasses
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy.special import gammaln, loggamma

from .errors import NonConvergence, NormalizationDefect, OutOfStrip
from .numerics import (DecayHint, Grid, GridFunction, invert_mellin_on_grid)
from .specfun import AlphaParams

__all__ = [
    "MellinSymbol", "Density", "catalogue", "symbol", "exp_family_symbol",
    "phi_alpha", "density",
]


@dataclasses.dataclass(frozen=True)
class MellinSymbol:
    """const * rho^s * prod_j Gamma(p_j s + q_j)^{eps_j} on a strip."""

    name: str
    factors: Tuple[Tuple[float, float, int], ...]  # (p, q, eps)
    const: float = 1.0
    log_rho: float = 0.0
    strip: Tuple[float, float] = (0.0, np.inf)

    def log_value(self, s):
        """log of the symbol; the accurate route for products and ratios."""
        s = np.asarray(s, dtype=complex)
        self._check_strip(s)
        acc = np.full(s.shape, np.log(self.const) + 0j) \
            if self.const != 1.0 else np.zeros(s.shape, dtype=complex)
        acc = acc + s * self.log_rho
        for p, q, eps in self.factors:
            acc = acc + eps * loggamma(p * s + q)
        return acc

    def __call__(self, s):
        out = np.exp(self.log_value(s))
        return out if out.ndim else complex(out)

    def _check_strip(self, s: np.ndarray) -> None:
        re = s.real
        lo, hi = self.strip
        if np.any(re <= lo) or np.any(re >= hi):
            raise OutOfStrip(
                f"{self.name}: Re s must lie in the open strip "
                f"({lo:g}, {hi:g})")

    def decay(self, a: float) -> Tuple[float, float]:
        """(polynomial exponent, exponential rate) of |symbol(a+ib)|,
        |b| -> infinity.  Positive rate means decay."""
        rate = 0.5 * np.pi * sum(eps * abs(p) for p, _, eps in self.factors)
        poly = sum(eps * (p * a + q - 0.5) for p, q, eps in self.factors)
        return poly, rate


@lru_cache(maxsize=32)
def catalogue(alpha: float) -> dict:
    """All fixed multipliers for one stability index, keyed by name."""
    params = AlphaParams(alpha)
    a = params.alpha
    inv_g1p = 1.0 / params.gamma_one_plus
    inv_gia = 1.0 / params.gamma_inv_alpha
    cat = {
        # Markov multiplier of the intertwining operator, written pole-free:
        # Gamma((s-1)/alpha + 1) Gamma(s/alpha + 1)
        #   / (Gamma(1 + 1/alpha) Gamma(s + 1))
        "M_Lambda": MellinSymbol(
            "M_Lambda",
            ((1.0 / a, 1.0 - 1.0 / a, +1), (1.0 / a, 1.0, +1),
             (1.0, 1.0, -1)),
            const=inv_g1p, strip=(1.0 - a, np.inf)),
        # multiplier of the series preimage g_alpha
        "M_alpha": MellinSymbol(
            "M_alpha",
            ((1.0 / a, 0.0, +1), (-1.0, 1.0, +1),
             (-1.0 / a, 1.0, -1), (-1.0 / a, 1.0 / a, -1)),
            const=params.gamma_one_plus, strip=(0.0, 1.0)),
        # entrance-law (unit time) moment transform
        "M_X": MellinSymbol(
            "M_X",
            ((1.0, 0.0, +1), (1.0 / a, 1.0 - 1.0 / a, -1)),
            strip=(0.0, np.inf)),
        # stretched-exponential reference law
        "M_G": MellinSymbol(
            "M_G", ((1.0 / a, 0.0, +1),), const=inv_gia,
            strip=(0.0, np.inf)),
        # eigenfunction transform
        "M_calJ": MellinSymbol(
            "M_calJ",
            ((-1.0 / a, 1.0, +1), (1.0 / a, 0.0, +1), (-1.0, 1.0, -1)),
            const=inv_gia, strip=(0.0, a)),
        # Bessel-type transform multiplier; |M_J| = 1 on Re s = 1/2
        "M_J": MellinSymbol(
            "M_J", ((1.0 / a, 0.0, +1), (-1.0 / a, 1.0 / a, -1)),
            strip=(0.0, 1.0)),
        # co-residual transform multiplier; grows on vertical lines, so it
        # is catalogued for identities only and never inverted
        "M_hatH": MellinSymbol(
            "M_hatH",
            ((1.0, 0.0, +1), (-1.0 / a, 1.0 / a, -1),
             (1.0 / a, 1.0 - 1.0 / a, -1)),
            const=params.gamma_inv_alpha, strip=(0.0, 1.0)),
    }
    return cat


def symbol(name: str, params: AlphaParams, s):
    """Evaluate a catalogued multiplier at s (strip-checked)."""
    cat = catalogue(params.alpha)
    if name not in cat:
        raise KeyError(f"unknown Mellin symbol {name!r}; "
                       f"catalogue has {sorted(cat)}")
    return cat[name](s)


def exp_family_symbol(params: AlphaParams, alphakappa: float,
                      tau: float) -> MellinSymbol:
    """Mellin transform of x -> exp(-tau x^{alphakappa}):
    tau^{-s/(alphakappa)} Gamma(s/alphakappa) / alphakappa."""
    if alphakappa <= 0 or tau <= 0:
        raise ValueError("exp_family_symbol needs alphakappa, tau > 0")
    return MellinSymbol(
        f"M_e[{alphakappa:g},{tau:g}]",
        ((1.0 / alphakappa, 0.0, +1),),
        const=1.0 / alphakappa,
        log_rho=-np.log(tau) / alphakappa,
        strip=(0.0, np.inf))


def phi_alpha(u, params: AlphaParams):
    """Bernstein function alpha Gamma(alpha u + 1) / Gamma(alpha u + 2 - alpha).

    This is the pole-free rewriting of
    Gamma(alpha u + 1) / (Gamma(alpha u + 1 - alpha) (u - 1 + 1/alpha));
    the removable singularity at u = 1 - 1/alpha cancels against the
    Gamma recurrence, so the quotient form below is valid for all u > 0.
    """
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr <= 0):
        raise ValueError("phi_alpha requires u > 0")
    a = params.alpha
    out = a * np.exp(gammaln(a * u_arr + 1.0) - gammaln(a * u_arr + 2.0 - a))
    return out if np.ndim(u) else float(out)


@dataclasses.dataclass(frozen=True)
class Density:
    """A probability density sampled on a grid, with its bookkeeping."""

    name: str
    samples: GridFunction
    normalization_defect: float
    clip_mass: float = 0.0  # integral of clipped negative inversion noise

    def __call__(self, y):
        return self.samples(y)


def _tail_hint_from_samples(grid: Grid, vals: np.ndarray,
                            power: float) -> Optional[DecayHint]:
    """Calibrate a stretched-exponential rate from the last decade of
    samples (the exponent is known analytically, the rate is fitted)."""
    n = len(grid)
    i, j = int(0.9 * n), n - 1
    if vals[i] <= 0 or vals[j] <= 0 or vals[j] >= vals[i]:
        return None
    rate = np.log(vals[i] / vals[j]) \
        / (grid.points[j] ** power - grid.points[i] ** power)
    if not (np.isfinite(rate) and rate > 0):
        return None
    return DecayHint("stretched-exponential", rate=float(rate), power=power)


# the mass check always integrates out to here, whatever grid the caller
# asked for; every shipped density is < 1e-12 beyond it for all alpha
_MASS_X_MAX = 50.0


def _panel_mass(evaluate, x_max: float = _MASS_X_MAX) -> float:
    """Integral over (0, x_max) by 15-point panels on geometric edges,
    with fresh evaluations at the panel nodes.

    A sampled table cannot carry this check: near alpha -> 2 the
    densities develop a cliff (tail exponent alpha/(2-alpha)) that a
    fixed log grid resolves to only ~1e-5, while the contract is 1e-6.
    """
    from .numerics import _KRONROD_NODES, _KRONROD_WEIGHTS
    edges = np.concatenate([[0.0], np.geomspace(1e-4, x_max, 121)])
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    nodes = (mid[:, None] + half[:, None] * _KRONROD_NODES[None, :]).ravel()
    wts = (half[:, None] * _KRONROD_WEIGHTS[None, :]).ravel()
    vals = np.clip(np.asarray(evaluate(nodes), dtype=float), 0.0, None)
    return float(np.sum(wts * vals))


_DENSITY_SYMBOL = {"lambda_alpha": "M_Lambda", "lambda_X": "M_X"}


def density(name: str, params: AlphaParams, grid: Optional[Grid] = None,
            tol: float = 1e-9) -> Density:
    """Build a named density on a grid.

    lambda_alpha and lambda_X come from vertical-line inversion of their
    multipliers at abscissa 1/2; lambda_G is closed-form.  Negative
    inversion noise below 1e-9 is clipped to zero and accounted for in
    ``clip_mass``; anything more negative is a hard failure, because
    these functions are provably nonnegative.
    """
    if grid is None:
        grid = Grid.logarithmic()
    a = params.alpha

    if name == "lambda_G":
        vals = a * np.exp(-grid.points ** a) / params.gamma_inv_alpha
        hint = DecayHint("stretched-exponential", rate=1.0, power=a)
        gf = GridFunction(grid, vals, hint)
        defect = abs(1.0 - _panel_mass(
            lambda ys: a * np.exp(-ys ** a) / params.gamma_inv_alpha))
        return Density(name, gf, defect)

    if name not in _DENSITY_SYMBOL:
        raise KeyError(f"unknown density {name!r}")
    sym = catalogue(params.alpha)[_DENSITY_SYMBOL[name]]
    vals = invert_mellin_on_grid(sym, grid.points, 0.5, tol)

    neg = vals < 0
    clip_mass = 0.0
    if np.any(neg):
        worst = float(vals.min())
        if worst < -1e-9:
            raise NonConvergence(
                f"{name}: inversion produced negativity {worst:.3e}, "
                "beyond the noise floor")
        clip_mass = float(np.trapezoid(np.where(neg, -vals, 0.0),
                                       grid.points))
        vals = np.where(neg, 0.0, vals)

    # known tail exponents: the multiplier grows like Gamma(s)^{1/p}
    power = a / (2.0 - a) if name == "lambda_alpha" else a / (a - 1.0)
    hint = _tail_hint_from_samples(grid, vals, power)
    gf = GridFunction(grid, vals, hint)
    defect = abs(1.0 - _panel_mass(
        lambda ys: invert_mellin_on_grid(sym, ys, 0.5, tol)))
    if defect > 1e-6:
        raise NormalizationDefect(
            f"{name}: density mass off by {defect:.3e} (> 1e-6)")
    return Density(name, gf, defect, clip_mass)


@lru_cache(maxsize=16)
def cached_density(name: str, alpha: float) -> Density:
    """Default-grid density cache shared by the operator modules."""
    return density(name, AlphaParams(alpha))


def lambda_G_value(y, params: AlphaParams):
    """Closed-form reference density alpha e^{-y^alpha} / Gamma(1/alpha)."""
    y_arr = np.asarray(y, dtype=float)
    out = params.alpha * np.exp(-y_arr ** params.alpha) \
        / params.gamma_inv_alpha
    return out if np.ndim(y) else float(out)
