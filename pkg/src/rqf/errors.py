"""Exception hierarchy shared by all rqf modules."""


class RQFError(Exception):
    """Base class for domain errors (mapped to exit code 1 by the CLI)."""


class ParameterError(RQFError, ValueError):
    field = ""

    def __init__(self, value, message=None):
        self.value = value
        super().__init__(message or f"invalid {self.field}: {value!r}")


class NonPositiveSigma(ParameterError):
    field = "sigma"

    def __init__(self, value):
        super().__init__(value, f"sigma must be > 0, got {value!r}")


class NonPositiveQ(ParameterError):
    field = "q"

    def __init__(self, value):
        super().__init__(value, f"q must be > 0, got {value!r}")


class NegativeRate(ParameterError):
    field = "rate"

    def __init__(self, value):
        super().__init__(value, f"rate must be >= 0, got {value!r}")


class NonPositiveSpot(ParameterError):
    field = "spot"

    def __init__(self, value):
        super().__init__(value, f"spot must be > 0, got {value!r}")


class NonPositiveTime(ParameterError):
    field = "t"

    def __init__(self, value):
        super().__init__(value, f"time must be > 0, got {value!r}")


class InvalidContract(RQFError, ValueError):
    pass


class GridMismatch(RQFError, ValueError):
    pass


class GaugeOverflow(RQFError, OverflowError):
    pass


class QuadratureFailure(RQFError, ArithmeticError):
    pass


class InadmissiblePayoff(RQFError, ValueError):
    def __init__(self, reason):
        self.reason = reason
        super().__init__(reason)


class NoConvergence(RQFError, ArithmeticError):
    def __init__(self, iterations, residual=None, message=None):
        self.iterations = iterations
        self.residual = residual
        if message is None:
            message = f"no convergence after {iterations} iterations"
            if residual is not None:
                message += f" (achieved residual {residual:.3e})"
        super().__init__(message)


class ResampleOutOfDomain(RQFError, ValueError):
    pass


class SeriesError(RQFError, ValueError):
    """Row-level problem in a price file; ``line`` is 1-based and counts the header."""

    kind = "invalid row"

    def __init__(self, line, detail=""):
        self.line = line
        msg = f"line {line}: {self.kind}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class ParseError(SeriesError):
    kind = "parse error"


class NonPositivePrice(SeriesError):
    kind = "non-positive price"


class NonMonotoneDate(SeriesError):
    kind = "dates not strictly increasing"


class TooShort(RQFError, ValueError):
    pass


class DegenerateSample(RQFError, ValueError):
    pass
