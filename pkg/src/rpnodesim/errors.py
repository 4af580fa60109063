"""Exception types shared across the package."""


class GraphFormatError(ValueError):
    """Malformed or unsupported Matrix Market input."""


class BoundsError(IndexError):
    """Node or entry index outside the declared range."""


class ResourceLimitError(RuntimeError):
    """Operation would exceed a configured size or memory budget."""


class NumericError(ArithmeticError):
    """Non-finite values appeared during numeric accumulation."""


class ConfigError(ValueError):
    """Inconsistent or unrecognised configuration."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of a formula."""


class DegenerateError(ValueError):
    """Quantity undefined for the given inputs (zero degree, tied order)."""


class SamplingError(ValueError):
    """Requested sample cannot be drawn from the available population."""
