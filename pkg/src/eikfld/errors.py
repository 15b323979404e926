"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


class PrecisionError(ArithmeticError):
    """Raised when the arithmetic backend cannot represent the result.

    The message always names the remedy: raise the mantissa bit count or
    switch from native64 to the bigfloat backend.
    """
