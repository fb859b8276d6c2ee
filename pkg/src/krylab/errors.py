"""Exception and warning types shared across krylab."""


class KrylabError(Exception):
    """Base class for all krylab errors."""


class SpaceMismatch(KrylabError, ValueError):
    """Two objects live in different ambient spaces."""


class ZeroDatum(KrylabError, ValueError):
    """A Krylov construction was requested for a zero vector."""


class NotASolution(KrylabError, ValueError):
    """The claimed solution does not satisfy the linear problem."""


class DegenerateComplement(KrylabError, RuntimeWarning):
    """The operator annihilates the whole orthogonal complement."""


class NoConvergence(RuntimeWarning):
    """An iterative estimate ran out of budget; the best estimate is kept."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class UnknownScenario(KrylabError, KeyError):
    pass


class BadParams(KrylabError, ValueError):
    pass


class DimTooLarge(KrylabError, ValueError):
    pass


class NotCertified(KrylabError, ValueError):
    pass


class SingularSolve(KrylabError, ArithmeticError):
    pass


class BudgetExceeded(KrylabError, RuntimeError):
    pass


class ConfigParse(KrylabError, ValueError):
    pass
