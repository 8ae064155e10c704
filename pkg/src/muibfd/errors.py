"""Exception hierarchy shared by all modules."""


class MuibfdError(Exception):
    """Base class for simulator errors."""


class GeometryError(MuibfdError, ValueError):
    """Degenerate geometry, e.g. a zero-length direction vector."""


class NearFieldError(GeometryError):
    """A link is shorter than the scenario's near-field cutoff."""


class UnknownReferenceError(MuibfdError, KeyError):
    """An unknown node, port, UAV, or channel id was referenced."""

    def __str__(self):
        # KeyError quotes its argument; plain messages read better
        return Exception.__str__(self)


class PlanError(MuibfdError, ValueError):
    """A channel plan is structurally invalid."""


class InfeasibleError(MuibfdError):
    """No candidate satisfies the constraints."""


class ConditioningError(MuibfdError, ArithmeticError):
    """A kernel matrix could not be factorized."""


class EmptyMapError(MuibfdError, ValueError):
    """A grid map has no unmasked cells."""
