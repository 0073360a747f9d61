"""The four integral operators, as maps between sampled functions.

* ``apply_lambda``          Lf(x)    = int f(x y) lam(y) dy
* ``apply_lambda_adjoint``  L*f(x)   = int f(y) lam(x/y) dy / y
                                     = int f(x/u) lam(u) du / u
* ``apply_H``               kind H_alpha: int f(x) J(q x) dx
                            kind calH:    int f(x) calJ(q x) dx
                            kind hat_calH: int f(x) hatJ(q x) dx

All three share one discretization trick: nodes and weights are built
once per (operator, alpha) and reused, so repeated application is a dot
product.  The multiplicative operator's weights include the kernel
density and are normalized to unit mass, which makes the Markov
contraction sup|Lf| <= sup|f| exact as evaluated and makes the discrete
adjoint pairing <Lf, g> = <f, L*g> hold to outer-quadrature accuracy.

The co-residual transform (hat_calH) is special: its kernel grows like
e^{|cos(pi/alpha)| q x}, so the integral representation only exists on
declared function classes whose decay beats that growth.  Callers must
declare the class; the integrand is probed at the truncation point and
the transform refuses to integrate anything still growing there.
"""

from __future__ import annotations

import dataclasses
from functools import lru_cache
from typing import Callable, Optional, Tuple, Union

import numpy as np

from .errors import ClassViolation, NonConvergence
from .mellin import cached_density
from .numerics import DecayHint, GridFunction, integrate_semiinfinite
from .specfun import AlphaParams, besselJ_alpha, calJ, hatJ

__all__ = [
    "OperatorSpec", "FunctionClass", "L2Plain", "EAlphaKappa", "WeightedL2",
    "RangeLambda", "apply_lambda", "apply_lambda_adjoint", "apply_H",
    "hatH_exp_series", "kernel_matrix",
]

_KINDS = ("Lambda", "LambdaAdjoint", "H_alpha", "calH", "hat_calH")


@dataclasses.dataclass(frozen=True)
class OperatorSpec:
    kind: str
    params: AlphaParams
    quad_tol: float = 1e-9

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.quad_tol <= 0:
            raise ValueError("quad_tol must be positive")


# --------------------------------------------------------------------------
# declared function classes
# --------------------------------------------------------------------------


class FunctionClass:
    """Base marker for explicit domain declarations (never inferred)."""

    def validate(self, params: AlphaParams) -> None:  # pragma: no cover
        pass


@dataclasses.dataclass(frozen=True)
class L2Plain(FunctionClass):
    """Square-integrable with a decay hint; admissible for H_alpha/calH."""


@dataclasses.dataclass(frozen=True)
class EAlphaKappa(FunctionClass):
    """Finite combination sum_i c_i exp(-tau_i x^{alpha kappa})."""

    kappa: float
    atoms: Tuple[Tuple[float, float], ...]  # (tau, coefficient)

    def validate(self, params: AlphaParams) -> None:
        a = params.alpha
        hi = a / (2.0 - a)
        if not (1.0 < self.kappa < hi):
            raise ClassViolation(
                f"EAlphaKappa requires 1 < kappa < alpha/(2-alpha) "
                f"= {hi:.6g}; got kappa={self.kappa!r}")
        if not self.atoms:
            raise ClassViolation("EAlphaKappa needs at least one atom")
        if any(tau <= 0 for tau, _ in self.atoms):
            raise ClassViolation("EAlphaKappa atom scales must be positive")


@dataclasses.dataclass(frozen=True)
class WeightedL2(FunctionClass):
    """Square-integrable against the weight e^{eta x^kappa}."""

    kappa: float
    eta: float

    def validate(self, params: AlphaParams) -> None:
        a = params.alpha
        lo = a / (a - 1.0)
        if self.kappa < lo:
            raise ClassViolation(
                f"WeightedL2 requires kappa >= alpha/(alpha-1) = {lo:.6g}; "
                f"got kappa={self.kappa!r}")
        if self.eta <= 0:
            raise ClassViolation("WeightedL2 weight rate must be positive")


@dataclasses.dataclass(frozen=True)
class RangeLambda(FunctionClass):
    """f = Lambda(preimage): declared through an explicit preimage handle.

    The preimage is what the transforms act on (the co-residual transform
    of such f equals the Bessel transform of the preimage), so it must be
    evaluable wherever those quadratures look.
    """

    preimage: Callable
    preimage_hint: Optional[DecayHint] = None
    label: str = ""


# --------------------------------------------------------------------------
# multiplicative operator and its adjoint
# --------------------------------------------------------------------------


@lru_cache(maxsize=16)
def _lambda_rule(alpha: float) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes y_i and normalized weights w_i lam(y_i) for the kernel
    density; 15-point panels on geometric edges across its support.

    The density is inverted directly at the quadrature nodes rather than
    interpolated off a table: the identity checks downstream sit at 1e-6
    and table interpolation alone would eat that budget."""
    from .mellin import catalogue
    from .numerics import (_KRONROD_NODES, _KRONROD_WEIGHTS,
                           invert_mellin_on_grid)
    edges = np.geomspace(1e-4, 50.0, 120)
    edges = np.concatenate([[0.0], edges])
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _KRONROD_NODES[None, :]).ravel()
    wts = (half[:, None] * _KRONROD_WEIGHTS[None, :]).ravel()
    sym = catalogue(alpha)["M_Lambda"]
    dens = np.clip(invert_mellin_on_grid(sym, nodes, 0.5, 1e-10), 0.0, None)
    # cut the rule where the density truly dies: beyond that point the
    # inversion returns ~1e-12 noise, and keeping those nodes forces f
    # evaluations far outside anything the integral can feel (the series
    # preimages are not even computable out there)
    keep = np.nonzero(dens > 1e-9 * dens.max())[0]
    last = int(keep.max()) + 1
    nodes, wts, dens = nodes[:last], wts[:last], dens[:last]
    w = wts * dens
    w /= w.sum()  # exact Markov normalization
    return nodes, w


def _as_callable(f: Union[GridFunction, Callable]) -> Callable:
    return f if callable(f) else (lambda x: f(x))


def apply_lambda(f: Union[GridFunction, Callable], x, spec: OperatorSpec):
    """Multiplicative Markov operator at one or many points x."""
    nodes, w = _lambda_rule(spec.params.alpha)
    fc = _as_callable(f)
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    vals = np.asarray(fc(np.outer(x_arr, nodes).ravel())).reshape(
        x_arr.size, nodes.size)
    out = vals @ w
    return out if np.ndim(x) else float(out[0])


def apply_lambda_adjoint(f: Union[GridFunction, Callable], x,
                         spec: OperatorSpec):
    """L2 adjoint of the multiplicative operator.

    Same nodes and weights as the forward operator: evaluated as
    int f(x/u) lam(u) du / u, which makes the discrete pairing with
    apply_lambda exact up to the outer quadrature.
    """
    nodes, w = _lambda_rule(spec.params.alpha)
    fc = _as_callable(f)
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    args = x_arr[:, None] / nodes[None, :]
    vals = np.asarray(fc(args.ravel())).reshape(args.shape)
    out = (vals / nodes[None, :]) @ w
    return out if np.ndim(x) else float(out[0])


# --------------------------------------------------------------------------
# transforms with kernels J, calJ, hatJ
# --------------------------------------------------------------------------


def _kernel_fn(kind: str, params: AlphaParams) -> Callable:
    if kind == "H_alpha":
        return lambda z: besselJ_alpha(z, params)
    if kind == "calH":
        return lambda z: calJ(z, params)
    if kind == "hat_calH":
        return lambda z: hatJ(z, params)
    raise ValueError(f"no integral kernel for kind {kind!r}")


def kernel_matrix(kind: str, params: AlphaParams, qs: np.ndarray,
                  xs: np.ndarray) -> np.ndarray:
    """K(q_i x_j) for the named kernel; the precompute behind repeated
    transform application on fixed grids."""
    K = _kernel_fn(kind, params)
    qs = np.asarray(qs, dtype=float)
    xs = np.asarray(xs, dtype=float)
    return np.asarray(K(np.outer(qs, xs).ravel())).reshape(qs.size, xs.size)


def _decaying_transform(f: Callable, hint: Optional[DecayHint], q: float,
                        kernel: Callable, tol: float) -> float:
    """int f(x) K(q x) dx for bounded kernels K (J or calJ)."""

    def integrand(x):
        x = np.asarray(x, dtype=float)
        return np.asarray(f(x)) * np.asarray(kernel(q * x))

    res = integrate_semiinfinite(integrand, hint, tol,
                                 initial_panels=48)
    return res.value


def _growing_cutoff(decay: DecayHint, growth: float, tol: float) -> float:
    """Truncation point where r x^p - growth x has beaten log(1/tol) + 10.

    Bisection above the stationary point of the exponent; existence needs
    p > 1, which the declared classes guarantee.
    """
    r, p = decay.rate, decay.power
    if p <= 1.0:
        raise ClassViolation(
            "declared decay does not beat the kernel growth (power <= 1)")
    target = np.log(1.0 / tol) + 10.0
    x = max(1.0, (growth / (r * p)) ** (1.0 / (p - 1.0)))  # stationary point
    hi = x
    for _ in range(200):
        if r * hi ** p - growth * hi >= target:
            break
        hi *= 1.4
    else:
        raise NonConvergence("no truncation point found for growing kernel")
    lo = x
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if r * mid ** p - growth * mid >= target:
            hi = mid
        else:
            lo = mid
    return hi


def apply_H(f: Union[GridFunction, Callable], q, spec: OperatorSpec,
            f_class: Optional[FunctionClass] = None):
    """Transform with kernel J (H_alpha), calJ (calH), or hatJ (hat_calH).

    For hat_calH the caller must declare the function class; only the
    stretched-exponential classes admit the integral representation.
    Functions declared RangeLambda are handled by the solver layer, which
    rewrites their transform through the preimage instead of integrating
    against the growing kernel.
    """
    params = spec.params
    q_arr = np.atleast_1d(np.asarray(q, dtype=float))
    if np.any(q_arr <= 0):
        raise ValueError("transform argument q must be positive")
    fc = _as_callable(f)
    hint = f.decay_hint if isinstance(f, GridFunction) else None

    if spec.kind in ("H_alpha", "calH"):
        kernel = _kernel_fn(spec.kind, params)
        if hint is None:
            hint = DecayHint("stretched-exponential", rate=0.5, power=1.0)
        out = np.array([_decaying_transform(fc, hint, float(qq), kernel,
                                            spec.quad_tol)
                        for qq in q_arr])
        return out if np.ndim(q) else float(out[0])

    if spec.kind != "hat_calH":
        raise ValueError(f"apply_H cannot evaluate kind {spec.kind!r}")

    # ---- growing-kernel transform ----
    if f_class is None:
        raise ClassViolation(
            "hat_calH requires an explicit FunctionClass declaration")
    if isinstance(f_class, RangeLambda):
        raise ClassViolation(
            "hat_calH on a RangeLambda function must go through the "
            "preimage dispatch (see the solver module); the direct "
            "integral does not converge for power-tailed f")
    if not isinstance(f_class, (EAlphaKappa, WeightedL2)):
        raise ClassViolation(
            f"hat_calH undefined on class {type(f_class).__name__}")
    f_class.validate(params)

    if isinstance(f_class, EAlphaKappa):
        rate = min(tau for tau, _ in f_class.atoms)
        power = params.alpha * f_class.kappa
    else:
        rate, power = 0.5 * f_class.eta, f_class.kappa
    decl = DecayHint("stretched-exponential", rate=rate, power=power)

    growth = -params.cos_pa  # hatJ growth rate per unit argument
    out = np.empty_like(q_arr)
    for i, qq in enumerate(q_arr):
        x_star = _growing_cutoff(decl, growth * qq, spec.quad_tol)

        def integrand(x):
            x = np.asarray(x, dtype=float)
            return np.asarray(fc(x)) * hatJ(qq * x, params)

        # class guard: the integrand must have died by the cutoff
        body = np.abs(integrand(np.linspace(0.1, x_star, 64)))
        peak = float(body.max())
        edge = float(np.abs(integrand(np.array([x_star]))))
        if not np.isfinite(peak) or edge > 1e-7 * max(peak, 1.0):
            raise ClassViolation(
                "integrand not decayed at the truncation point; declared "
                "class inconsistent with the sampled function")
        res = integrate_semiinfinite(integrand, None, spec.quad_tol,
                                     x_star=x_star,
                                     initial_panels=max(32, int(x_star * 2)))
        out[i] = res.value
    return out if np.ndim(q) else float(out[0])


def hatH_exp_series(q, params: AlphaParams, alphakappa: float, tau: float,
                    tol: float = 1e-12, m_max: int = 600):
    """Entire-series form of the co-residual transform of
    exp(-tau x^{alphakappa}):

        (Gamma(1/alpha)/(alphakappa pi)) sum_n (-1)^n
        Gamma((n+1)/alphakappa) sin((n+1) pi_a)
        tau^{-(n+1)/alphakappa} q^n / n!

    Stopping tests the sine-free envelope (the sine factor has exact
    zeros at rational alpha, so the raw term is no convergence signal).
    """
    from scipy.special import gammaln
    q_arr = np.atleast_1d(np.asarray(q, dtype=float))
    pa = params.pi_alpha
    ak = alphakappa
    pref = params.gamma_inv_alpha / (ak * np.pi)
    lntau = np.log(tau)

    out = np.zeros_like(q_arr)
    comp = np.zeros_like(q_arr)
    env_max = np.zeros_like(q_arr)
    small = np.zeros(q_arr.size, dtype=int)
    with np.errstate(divide="ignore"):
        lnq = np.where(q_arr > 0, np.log(q_arr), -np.inf)
    done = np.zeros(q_arr.size, dtype=bool)
    for n in range(m_max):
        log_env = gammaln((n + 1.0) / ak) - (n + 1.0) / ak * lntau \
            - gammaln(n + 1.0) + n * lnq
        env = pref * np.exp(log_env)
        env_max = np.maximum(env_max, env)
        t = (1.0 if n % 2 == 0 else -1.0) * np.sin((n + 1.0) * pa) * env
        s = out + t
        big = np.abs(out) >= np.abs(t)
        comp += np.where(big, (out - s) + t, (t - s) + out)
        out = s
        conv = env < tol * np.maximum(np.abs(out), 1e-3 * env_max)
        small = np.where(conv, small + 1, 0)
        done = small >= 3
        if np.all(done):
            break
    else:
        raise NonConvergence("hatH_exp_series did not converge")
    out = out + comp
    if np.any(env_max > 1e15 * np.maximum(np.abs(out), 1e-300)):
        raise NonConvergence("hatH_exp_series cancellation beyond budget")
    return out if np.ndim(q) else float(out[0])


def l2_norm(f: Callable, hint: Optional[DecayHint], tol: float = 1e-10
            ) -> float:
    """L2(0, infinity) norm by quadrature of f^2."""

    def sq(x):
        v = np.asarray(f(np.asarray(x, dtype=float)))
        return v * v

    sq_hint = None
    if hint is not None:
        if hint.kind == "power":
            sq_hint = DecayHint("power", rate=2.0 * hint.rate)
        else:
            sq_hint = DecayHint("stretched-exponential",
                                rate=2.0 * hint.rate, power=hint.power)
    res = integrate_semiinfinite(sq, sq_hint, tol)
    return float(np.sqrt(max(res.value, 0.0)))
