"""Exception hierarchy shared by all hessk modules."""


class HesskError(Exception):
    """Base class for every error raised by hessk."""


# linear algebra kernel
class NotSymmetricError(HesskError, ValueError):
    pass


class NotSkewError(HesskError, ValueError):
    pass


class NoConvergenceError(HesskError, ArithmeticError):
    pass


class SingularError(HesskError, ArithmeticError):
    pass


class NonFiniteError(HesskError, ValueError):
    pass


# symmetric polynomials and cones
class BadDegreeError(HesskError, ValueError):
    pass


class BadIndexError(HesskError, IndexError):
    pass


class NotPositiveError(HesskError, ValueError):
    pass


class MissingFreeGammaError(HesskError, ValueError):
    pass


class BadRangeError(HesskError, ValueError):
    pass


class NonPositiveSigmaError(HesskError, ValueError):
    pass


class TooLargeError(HesskError, ValueError):
    pass


# matrix level
class NonPositiveMinorError(HesskError, ValueError):
    pass


class NonPositiveSkError(HesskError, ValueError):
    pass


class SingularMinorError(SingularError):
    pass


class NotPositiveDefiniteError(HesskError, ValueError):
    pass


# verification
class InfeasibleParamsError(HesskError, ValueError):
    pass


class NonPositiveEstimateError(HesskError, ArithmeticError):
    pass


class BadDeltaError(HesskError, ValueError):
    pass


class BadBranchError(HesskError, ValueError):
    pass
