"""Exception types shared across the package."""


class LpresetError(Exception):
    """Base class for all package errors."""


class InputError(LpresetError):
    """Invalid input data (shapes, empty series, bad parameters)."""


class RangeError(LpresetError):
    """A value fell outside the covered range (price, bin index, offset)."""


class NumericalError(LpresetError):
    """A numerical procedure failed (overflow, non-convergence, bad bracket)."""
