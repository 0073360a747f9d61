"""Exception taxonomy shared by all modules.

Every numerical failure mode gets its own class so callers can react
(raise the crossover, widen the budget, pick another route) instead of
parsing message strings.
"""


class RefStableError(Exception):
    """Base class for all library errors."""


class NonConvergence(RefStableError):
    """Requested tolerance not reached within the evaluation budget."""


class InvalidTail(RefStableError):
    """Integrand fails the decay probe at the truncation point."""


class NoDecayMetadata(RefStableError):
    """Operation requires decay metadata that the object does not carry."""


class OrderUnsupported(RefStableError):
    """Derivative order outside the implemented range."""


# Some call sites grew up calling this by the flipped name; keep both.
UnsupportedOrder = OrderUnsupported


class CancellationOverflow(RefStableError):
    """Alternating-series terms exceed 1e15 times the result magnitude.

    Double precision has lost the answer; the caller must either move the
    evaluation to another branch (asymptotic expansion) or reject the input.
    """


class OutOfStrip(RefStableError):
    """Mellin symbol evaluated outside its strip of validity."""


class NormalizationDefect(RefStableError):
    """A probability density integrates to something too far from 1."""


class ClassViolation(RefStableError):
    """Operator applied to a function outside its declared domain class."""


class TruncationFailure(RefStableError):
    """Series envelope still growing at the maximum truncation order."""


class AdmissibilityViolation(RefStableError):
    """Solve requested below the admissible time threshold."""


class UnclassifiedFunction(RefStableError):
    """Initial data carries no recognized function-class declaration."""


class TailTooHeavy(RefStableError):
    """Function decays too slowly for the requested transform."""


class BudgetExceeded(RefStableError):
    """Monte Carlo work n_paths * n_steps above the configured budget."""
