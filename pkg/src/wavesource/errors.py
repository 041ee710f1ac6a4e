"""Error taxonomy shared across the package.

Construction-time validation raises ``ConfigError`` or ``InputError`` (both
``ValueError``); operations that are called with a state they refuse to handle
raise ``PreconditionError``; ``DeconvolutionError`` marks frequencies where the
temporal profile carries no usable spectral content; ``DomainError`` marks
arguments outside a formula's domain of validity.
"""


class ConfigError(ValueError):
    """A configuration value (or combination) is invalid."""


class InputError(ValueError):
    """An argument fails an operation's input contract."""


class PreconditionError(RuntimeError):
    """The operation refuses to run in the requested regime."""


class DeconvolutionError(RuntimeError):
    """Division by the profile spectrum is not allowed at this frequency."""

    def __init__(self, w: float, magnitude: float, threshold: float):
        self.w = float(w)
        self.magnitude = float(magnitude)
        self.threshold = float(threshold)
        super().__init__(
            f"profile spectrum too small at w={w:.6g}: "
            f"|g_hat|={magnitude:.3e} < threshold {threshold:.3e}"
        )


class DomainError(ValueError):
    """Argument outside the mathematical domain of the expression."""
