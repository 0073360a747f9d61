"""Spectral toolkit for the reflected one-sided stable semigroup.

Special functions, Mellin multipliers and densities, intertwining and
spectral-transform operators, the transition kernel in both of its
representations, a spectral Cauchy solver with fractional-derivative
diagnostics, a pathwise Monte Carlo oracle, and a validation registry
tying them together.
"""

from .errors import (AdmissibilityViolation, BudgetExceeded,
                     CancellationOverflow, ClassViolation, InvalidTail,
                     NoDecayMetadata, NonConvergence, NormalizationDefect,
                     OrderUnsupported, OutOfStrip, RefStableError,
                     TailTooHeavy, TruncationFailure, UnclassifiedFunction)
from .numerics import (DecayHint, Grid, GridFunction, QuadratureResult,
                       integrate_semiinfinite, integrate_vertical_line,
                       truncation_from_decay)
from .specfun import (AlphaParams, SeriesPolicy, besselJ_alpha, calJ,
                      calJ_decay, func_V, g_alpha, hatJ, hatJ_first_zero,
                      poly_P)
from .mellin import (MellinSymbol, catalogue, density, cached_density,
                     exp_family_symbol, lambda_G_value, phi_alpha, symbol)
from .operators import (EAlphaKappa, FunctionClass, L2Plain, OperatorSpec,
                        RangeLambda, WeightedL2, apply_H, apply_lambda,
                        apply_lambda_adjoint, hatH_exp_series, l2_norm)
from .heatkernel import (KernelRequest, KernelValue, bessel_kernel_Q,
                         entrance_density, kernel, kernel_apply,
                         kernel_integral, kernel_profile, kernel_series)
from .cauchy import (AdmissibilityReport, NamedInitial, SolveRequest,
                     admissibility, b_beta, caputo_derivative,
                     rl_coeigen_probe, rl_right_derivative, solve,
                     t_alpha_threshold)
from .stablemc import (MCConfig, PathEstimate, config_hash, estimate_Ptf,
                       sample_stable_increment, simulate_batch,
                       simulate_reflected)
from .checks import CheckResult, check_names, run_checks

__version__ = "0.1.0"

__all__ = [
    "AlphaParams", "SeriesPolicy", "besselJ_alpha", "calJ", "calJ_decay",
    "func_V", "g_alpha", "hatJ", "hatJ_first_zero", "poly_P",
    "MellinSymbol", "catalogue", "density", "cached_density",
    "exp_family_symbol", "lambda_G_value", "phi_alpha", "symbol",
    "EAlphaKappa", "FunctionClass", "L2Plain", "OperatorSpec",
    "RangeLambda", "WeightedL2", "apply_H", "apply_lambda",
    "apply_lambda_adjoint", "hatH_exp_series", "l2_norm",
    "KernelRequest", "KernelValue", "bessel_kernel_Q", "entrance_density",
    "kernel", "kernel_apply", "kernel_integral", "kernel_profile",
    "kernel_series",
    "AdmissibilityReport", "NamedInitial", "SolveRequest", "admissibility",
    "b_beta", "caputo_derivative", "rl_coeigen_probe",
    "rl_right_derivative", "solve", "t_alpha_threshold",
    "MCConfig", "PathEstimate", "config_hash", "estimate_Ptf",
    "sample_stable_increment", "simulate_batch", "simulate_reflected",
    "CheckResult", "check_names", "run_checks",
    "Grid", "GridFunction", "DecayHint", "QuadratureResult",
    "integrate_semiinfinite", "integrate_vertical_line",
    "truncation_from_decay",
    "RefStableError", "NonConvergence", "InvalidTail", "NoDecayMetadata",
    "OrderUnsupported", "CancellationOverflow", "OutOfStrip",
    "NormalizationDefect", "ClassViolation", "TruncationFailure",
    "AdmissibilityViolation", "UnclassifiedFunction", "TailTooHeavy",
    "BudgetExceeded",
    "__version__",
]
