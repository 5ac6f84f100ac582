"""Exception types shared across the package."""


class HalflineError(Exception):
    """Base class for all package-specific errors."""


class IterationLimitError(HalflineError):
    """Picard iteration hit its cap before the sup-norm delta fell below tolerance."""


class DivergenceError(HalflineError):
    """An iteration or integral grew beyond its configured ceiling."""


class UniquenessError(HalflineError):
    """Cross-start solves disagreed beyond the uniqueness tolerance."""


class ConfigError(HalflineError):
    """Invalid or unknown configuration input."""


class ReportMismatchError(HalflineError):
    """Report sections came from different run configurations."""
