"""Exception hierarchy shared by all modules."""


class GaudinOpersError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(GaudinOpersError, ValueError):
    pass


class NonTerminationError(GaudinOpersError):
    """An iteration cap was exceeded (e.g. reflecting outside the Tits cone)."""


class NumericError(GaudinOpersError, ArithmeticError):
    pass


class IllConditionedError(NumericError):
    """Poles or roots cluster too tightly to be separated at the tolerance."""


class CollisionError(NumericError):
    """Two points (root/root or root/site) came within the collision guard."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class DivergenceError(NumericError):
    def __init__(self, message, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


class LinearSolveError(NumericError):
    pass


class InconsistencyError(GaudinOpersError):
    """A value the theory forbids showed up (signals a non-solution)."""


class InfertileError(GaudinOpersError):
    """The reproduction integral has a logarithmic term."""

    def __init__(self, message, residues=(), relative=()):
        super().__init__(message)
        self.residues = list(residues)
        # residue divided by the double-pole coefficient at the same root
        self.relative = list(relative)


class DimensionCapError(GaudinOpersError):
    pass
