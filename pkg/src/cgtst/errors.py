"""Exception types raised across the package."""


class ChainDomainError(ValueError):
    """A bond length is non-positive or atoms have crossed."""


class ConvergenceError(RuntimeError):
    """An iterative solver did not reach its tolerance."""


class SaddleSearchError(RuntimeError):
    """No first-order saddle could be located."""


class RepatomRegionError(ValueError):
    """The constrained block C is not positive definite.

    This signals an inappropriate repatom region: the essential part of the
    transition is not contained in the chosen set of repatoms.
    """


class SpectrumError(ValueError):
    """A matrix does not have exactly one negative eigenvalue."""


class DegenerateOverlapError(ArithmeticError):
    """The overlap v_cg . u_at^r vanished, so the error identity is undefined."""


class RateOverflowError(OverflowError):
    """The absolute rate overflows a double; ``log_rate`` is still available."""

    def __init__(self, log_rate):
        super().__init__(f"rate overflows float64 (log rate = {log_rate!r})")
        self.log_rate = log_rate
