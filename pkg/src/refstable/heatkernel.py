"""Transition density of the reflected process, two independent ways.

Integral representation (any t > 0):

    p_t(x, y) = int_0^inf e^{-q^alpha t} calJ(q x) hatJ(q y) dq

with derivatives in t, x, y obtained by differentiating under the
integral, which inserts powers of q and shifts the kernel orders.

Series representation (large t; exact where it converges):

    p_t(x, y) = sum_n (1+t)^{-n-1/alpha} P_n(x^alpha) V_n(y (1+t)^{-1/alpha})

where P_n are the eigen-polynomials of the deterministic flow and V_n
their biorthogonal partners.  Both live in specfun; this module only
assembles rows and decides truncation.

The two representations share no code path below the special functions,
so their agreement (checked in the acceptance suite) is a real test.
"""

from __future__ import annotations

import dataclasses
from typing import Tuple

import numpy as np

from .errors import NonConvergence, OrderUnsupported, TruncationFailure
from .numerics import _GAUSS_SLICE, _GAUSS_WEIGHTS, _KRONROD_NODES, \
    _KRONROD_WEIGHTS
from .specfun import AlphaParams, _func_V_rows, _poly_P_rows, calJ, \
    hatJ_scaled

__all__ = ["KernelRequest", "KernelValue", "kernel", "kernel_integral",
           "kernel_series", "kernel_profile", "kernel_profile_x",
           "kernel_apply", "bessel_kernel_Q", "entrance_density"]


@dataclasses.dataclass(frozen=True)
class KernelRequest:
    t: float
    x: float
    y: float
    params: AlphaParams
    rep: str = "auto"
    orders: Tuple[int, int, int] = (0, 0, 0)  # (d/dt, d/dx, d/dy)
    tol: float = 1e-10

    def __post_init__(self):
        if self.t <= 0:
            raise ValueError("t must be positive")
        if self.x < 0 or self.y < 0:
            raise ValueError("x and y must be nonnegative")
        if self.rep not in ("auto", "integral", "series"):
            raise ValueError(f"unknown representation {self.rep!r}")
        k, p, m = self.orders
        if min(k, p, m) < 0 or k + p + m > 4 or p > 2:
            raise OrderUnsupported(
                "derivative orders limited to k+p+m <= 4 with p <= 2 "
                f"(got {self.orders})")


@dataclasses.dataclass(frozen=True)
class KernelValue:
    value: float
    error_estimate: float
    rep_used: str
    work: int  # kernel evaluations or series terms


def _truncation_q(t: float, y: float, params: AlphaParams,
                  tol: float, poly_order: float = 0.0) -> float:
    """Upper limit where q^alpha t - q y |cos pi_a| has beaten
    log(1/tol) plus margin plus any polynomial growth q^poly_order the
    derivative orders insert; bisection above the turnover point."""
    a = params.alpha
    c = -params.cos_pa
    base = np.log(1.0 / tol) + 12.0
    yc = y * c

    def dominated(q):
        target = base + poly_order * np.log(max(q, 1.0))
        return q ** a * t - q * yc >= target

    qlo = (2.0 * yc / (a * t)) ** (1.0 / (a - 1.0)) if yc > 0 else 0.0
    qlo = max(qlo, 1e-3)
    qhi = qlo
    for _ in range(400):
        if dominated(qhi):
            break
        qhi *= 1.3
    else:
        raise NonConvergence("kernel integrand never decays (t too small?)")
    lo = qlo
    for _ in range(80):
        mid = 0.5 * (lo + qhi)
        if dominated(mid):
            qhi = mid
        else:
            lo = mid
    return qhi


def _panel_nodes(q_star: float, per_unit: float = 10.0
                 ) -> Tuple[np.ndarray, np.ndarray, int]:
    n_panels = int(np.clip(np.ceil(q_star * per_unit), 40, 40000))
    edges = np.linspace(0.0, q_star, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _KRONROD_NODES[None, :])
    wts = half[:, None] * _KRONROD_WEIGHTS[None, :]
    return nodes, wts, n_panels


def _panel_density(t: float, y: float, params: AlphaParams) -> float:
    """Panels per unit q, scaled up with the envelope peak of
    e^{-q^alpha t - q y cos pa}.

    Near the support edge the quadrature must deliver absolute accuracy
    around tol while the integrand swings at e^peak: the discretization
    error has to shrink by that same factor, which the spectral decay of
    the panel rule buys at a linear cost in panel count."""
    a = params.alpha
    yc = -params.cos_pa * y
    if yc <= 0.0 or t <= 0.0:
        return 10.0
    q_pk = (yc / (a * t)) ** (1.0 / (a - 1.0))
    peak = q_pk * yc * (a - 1.0) / a
    return float(min(10.0 + 1.5 * max(0.0, peak), 80.0))


def _seam_bias(t: float, x: float, y: float, q_star: float,
               params: AlphaParams) -> float:
    """Absolute error floor left by calJ's series/asymptotic crossover.

    The crossover at argument 20 carries a ~5e-9 relative kink, an
    absolute ~2e-11 at calJ's size there.  In the fused integrand it
    gets multiplied by e^{logenv(q)} at q = 20/x, which near the
    support edge dominates every other error source."""
    if x <= 0.0:
        return 0.0
    qs = 20.0 / x
    if qs >= q_star:
        return 0.0
    env = -qs ** params.alpha * t - qs * y * params.cos_pa
    return float(2e-11 * np.exp(min(max(env, 0.0), 700.0)))


def _overflow_guard(peak: float, t: float, x: float, y: float) -> None:
    if peak > 600.0:
        raise NonConvergence(
            f"integrand envelope e^{peak:.0f} at t={t}, x={x}, y={y} "
            "overflows; the point lies far past the density support "
            "edge near x + 6 t^(1/alpha)")


def _cancellation_guard(abs_sum: float, tol: float, t: float, x: float,
                        y: float) -> float:
    """Pairwise summation of an oscillatory quadrature leaves roundoff
    ~ eps log2(n) sum|w v|.  Refuse when that floor swamps tol: past
    the support edge the density keeps dropping while the raw envelope
    keeps growing, so the requested digits stop being deliverable."""
    noise = 3e-15 * abs_sum
    if noise > max(10.0 * tol, 1e-8):
        raise NonConvergence(
            f"oscillatory cancellation at t={t}, x={x}, y={y}: absolute "
            f"integrand weight {abs_sum:.1e} leaves a roundoff floor "
            f"{noise:.1e} (tol {tol:.1e}); the point lies past the "
            "density support edge near x + 6 t^(1/alpha)")
    return noise


def kernel_integral(t: float, x: float, y: float, params: AlphaParams,
                    tol: float = 1e-10,
                    orders: Tuple[int, int, int] = (0, 0, 0)) -> KernelValue:
    k, p, m = orders
    po = params.alpha * k + p + m
    q_star = _truncation_q(t, y, params, tol, poly_order=po)
    nodes, wts, n_panels = _panel_nodes(q_star, _panel_density(t, y, params))
    q = nodes.ravel()
    # hatJ's envelope e^{-q y cos pa} grows; fuse it with the damping
    # exponent before exponentiating or large q y overflows
    logenv = -q ** params.alpha * t - (q * y) * params.cos_pa
    amp = logenv if po == 0.0 \
        else logenv + po * np.log(np.maximum(q, 1.0))
    _overflow_guard(float(amp.max()), t, x, y)
    vals = np.exp(logenv) * calJ(q * x, params, k=p) \
        * hatJ_scaled(q * y, params, m=m)
    if k or p or m:
        vals = vals * q ** po
        if k % 2:
            vals = -vals
    if not np.all(np.isfinite(vals)):
        raise NonConvergence("non-finite kernel integrand "
                             f"(orders={orders}, x={x}, y={y})")
    vals = vals.reshape(nodes.shape)
    noise = _cancellation_guard(float((np.abs(vals) * wts).sum()), tol,
                                t, x, y)
    k15 = (vals * wts).sum()
    half = wts[:, 7] / _KRONROD_WEIGHTS[7]
    g7 = (vals[:, _GAUSS_SLICE] * (half[:, None] * _GAUSS_WEIGHTS[None, :])
          ).sum()
    err = float(abs(k15 - g7)) + noise + _seam_bias(t, x, y, q_star,
                                                    params)
    return KernelValue(float(k15), err, "integral", q.size)


def kernel_series(t: float, x: float, y: float, params: AlphaParams,
                  tol: float = 1e-10, n_max: int = 160) -> KernelValue:
    a = params.alpha
    u = 1.0 + t
    scale = u ** (-1.0 / a)
    # rows needed before the geometric factor alone is below tol
    n_rows = int(np.ceil(np.log(1.0 / tol) / np.log(u))) + 8
    n_rows = min(max(n_rows, 24), n_max)
    P = _poly_P_rows(n_rows, x ** a, params)
    V = _func_V_rows(n_rows, y * scale, params)
    geo = u ** (-(np.arange(n_rows + 1) + 1.0 / a))
    terms = geo * P * V
    env = geo * np.abs(P) * np.abs(V)
    env_max = float(env.max()) if env.size else 0.0

    total = 0.0
    comp = 0.0
    small = 0
    used = n_rows + 1
    for n in range(n_rows + 1):
        tn = terms[n]
        s = total + tn
        comp += (total - s) + tn if abs(total) >= abs(tn) else (tn - s) + total
        total = s
        if env[n] < max(1e-13 * env_max, tol * max(abs(total), 1e-300)):
            small += 1
            if small >= 3:
                used = n + 1
                break
        else:
            small = 0
    else:
        if env[-1] > 10.0 * tol * max(abs(total), env_max * 1e-13):
            raise TruncationFailure(
                f"series not converged after {n_rows + 1} rows at "
                f"t={t}, x={x}, y={y}")
    total += comp
    tail = float(env[used - 1]) / max(1.0 - 1.0 / u, 1e-3)
    return KernelValue(float(total), tail, "series", used)


def kernel(req: KernelRequest) -> KernelValue:
    rep = req.rep
    if req.orders != (0, 0, 0):
        if rep == "series":
            raise OrderUnsupported(
                "derivatives are only available through the integral "
                "representation")
        rep = "integral"
    if rep == "auto":
        rep = "series" if (req.t >= 1.0 and req.x <= 2.0 and req.y <= 2.0) \
            else "integral"
    if rep == "integral":
        return kernel_integral(req.t, req.x, req.y, req.params, req.tol,
                               req.orders)
    return kernel_series(req.t, req.x, req.y, req.params, req.tol)


def kernel_profile(t: float, x: float, ys: np.ndarray, params: AlphaParams,
                   tol: float = 1e-10) -> Tuple[np.ndarray, np.ndarray]:
    """p_t(x, y) on a whole y-grid with one shared q-discretization.

    The e^{-q^alpha t} calJ(q x) factor is evaluated once; only the
    hatJ(q y) column changes per y.  Returns (values, error_estimates).
    """
    ys = np.asarray(ys, dtype=float)
    if np.any(ys < 0):
        raise ValueError("y must be nonnegative")
    y_top = float(ys.max())
    q_star = _truncation_q(t, y_top, params, tol)
    nodes, wts, _ = _panel_nodes(q_star, _panel_density(t, y_top, params))
    q = nodes.ravel()
    cal = calJ(q * x, params)
    qa_t = q ** params.alpha * t
    half = wts[:, 7] / _KRONROD_WEIGHTS[7]
    vals = np.empty(ys.size)
    errs = np.empty(ys.size)
    for j, yy in enumerate(ys):
        # per-y exponent fused with the damping, see kernel_integral
        logenv = -qa_t - (q * yy) * params.cos_pa
        _overflow_guard(float(logenv.max()), t, x, float(yy))
        col = (np.exp(logenv) * cal
               * hatJ_scaled(q * yy, params)).reshape(nodes.shape)
        noise = _cancellation_guard(float((np.abs(col) * wts).sum()),
                                    tol, t, x, float(yy))
        k15 = float((col * wts).sum())
        g7 = float((col[:, _GAUSS_SLICE]
                    * (half[:, None] * _GAUSS_WEIGHTS[None, :])).sum())
        vals[j] = k15
        errs[j] = abs(k15 - g7) + noise \
            + _seam_bias(t, x, float(yy), q_star, params)
    return vals, errs


def kernel_profile_x(t: float, xs: np.ndarray, y: float,
                     params: AlphaParams, tol: float = 1e-10
                     ) -> Tuple[np.ndarray, np.ndarray]:
    """p_t(x, y) along the first argument; the hatJ(q y) factor is
    shared, only the calJ(q x) column changes per x."""
    xs = np.asarray(xs, dtype=float)
    if np.any(xs < 0):
        raise ValueError("x must be nonnegative")
    q_star = _truncation_q(t, y, params, tol)
    nodes, wts, _ = _panel_nodes(q_star, _panel_density(t, y, params))
    q = nodes.ravel()
    logenv = -q ** params.alpha * t - (q * y) * params.cos_pa
    _overflow_guard(float(logenv.max()), t, float(xs.min()), y)
    base = np.exp(logenv) * hatJ_scaled(q * y, params)
    half = wts[:, 7] / _KRONROD_WEIGHTS[7]
    vals = np.empty(xs.size)
    errs = np.empty(xs.size)
    for j, xx in enumerate(xs):
        col = (base * calJ(q * xx, params)).reshape(nodes.shape)
        noise = _cancellation_guard(float((np.abs(col) * wts).sum()),
                                    tol, t, float(xx), y)
        k15 = float((col * wts).sum())
        g7 = float((col[:, _GAUSS_SLICE]
                    * (half[:, None] * _GAUSS_WEIGHTS[None, :])).sum())
        vals[j] = k15
        errs[j] = abs(k15 - g7) + noise \
            + _seam_bias(t, float(xx), y, q_star, params)
    return vals, errs


def kernel_apply(f, t: float, x: float, params: AlphaParams,
                 y_max: float = 0.0, tol: float = 1e-10) -> float:
    """int p_t(x, y) f(y) dy by quadrature over the shared-node profile.

    Independent of the spectral solver: this is the reference the solver
    routes are validated against.  y_max=0 picks a cutoff from the
    kernel's own stretched-exponential y-tail.
    """
    a = params.alpha
    if y_max <= 0.0:
        # the y-tail is stretched-exponential with rate pinned to the
        # t^{1/alpha} scale; past x + 5.5 t^{1/alpha} the mass is
        # < 1e-8 and the oscillatory integral turns cancellation-bound
        y_max = x + 5.5 * t ** (1.0 / a)
    n_panels = int(np.clip(np.ceil(y_max * 6), 36, 4000))
    edges = np.linspace(0.0, y_max, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    ys = (mid[:, None] + half[:, None] * _KRONROD_NODES[None, :]).ravel()
    w = (half[:, None] * _KRONROD_WEIGHTS[None, :]).ravel()
    vals, _ = kernel_profile(t, x, ys, params, tol)
    return float(np.sum(w * vals * np.asarray(f(ys), dtype=float)))


def bessel_kernel_Q(t: float, x: float, y, params: AlphaParams):
    """Transition density of the pre-intertwining squared-Bessel-type
    motion, mapped to the alpha-power coordinate.

    In u = x^alpha the motion is a squared Bessel flow of dimension
    2/alpha run at unit clock rate; the density below is its closed form
    with the Jacobian alpha y^{alpha-1} moving it back to y.  Vectorized
    over y (the integration variable in every consumer).
    """
    from scipy.special import gammaln, ive
    if t <= 0:
        raise ValueError("t must be positive")
    if x < 0:
        raise ValueError("x must be nonnegative")
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(y_arr < 0):
        raise ValueError("y must be nonnegative")
    a = params.alpha
    nu = 1.0 / a - 1.0
    u = x ** a
    v = y_arr ** a
    out = np.zeros_like(y_arr)
    pos = y_arr > 0.0
    jac = a * y_arr[pos] ** (a - 1.0)
    if u == 0.0:
        lg = nu * np.log(v[pos]) - v[pos] / t - (nu + 1.0) * np.log(t) \
            - gammaln(nu + 1.0)
        out[pos] = np.exp(lg) * jac
    else:
        z = 2.0 * np.sqrt(u * v[pos]) / t
        # ive = e^{-|z|} I_nu(z); fold the exponent into the Gaussian part
        core = np.exp(-(np.sqrt(u) - np.sqrt(v[pos])) ** 2 / t) * ive(nu, z)
        out[pos] = core / t * (v[pos] / u) ** (nu / 2.0) * jac
    return out if np.ndim(y) else float(out[0])


def entrance_density(t: float, y, params: AlphaParams,
                     tol: float = 1e-10):
    """Density started from the boundary point 0.

    Scales self-similarly: the t-density is the t=1 density of y t^{-1/a}
    times t^{-1/a}; evaluated here directly from the integral
    representation with the constant boundary value of calJ.
    """
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    vals, _ = kernel_profile(t, 0.0, y_arr, params, tol)
    return vals if np.ndim(y) else float(vals[0])
