"""Exception types shared across the package.

The CLI maps these onto process exit codes (see :mod:`wvae.cli`).
"""


class WVAEError(Exception):
    """Base class for all package errors."""


class ShapeError(WVAEError, ValueError):
    """Array dimensions are incompatible with the requested operation."""


class DomainError(WVAEError, ValueError):
    """A scalar argument lies outside its admissible range."""


class FormatError(WVAEError, ValueError):
    """A file on disk does not follow the expected binary layout."""


class ConfigError(WVAEError, ValueError):
    """An experiment configuration is invalid."""


class NumericalError(WVAEError, ArithmeticError):
    """A non-finite value appeared during training or evaluation."""


class UsageError(WVAEError, RuntimeError):
    """An API was called out of order (e.g. backward on a stale tape)."""
