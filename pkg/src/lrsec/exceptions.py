"""Exception types raised across the package."""


class DimensionError(ValueError):
    """Array shapes or index lists do not line up."""


class CommutationError(ValueError):
    """X and Z check matrices do not commute."""


class RingError(ValueError):
    """A protograph entry does not lift to a weight-balanced matrix."""


class ParseError(ValueError):
    """A matrix, code or circuit file could not be parsed."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)


class CollisionError(ValueError):
    """A qubit is scheduled for two operations in the same time step."""


class ImproperColoringError(ValueError):
    """Two edges sharing a vertex carry the same colour."""


ColouringError = ImproperColoringError


class EstimatorError(RuntimeError):
    """A randomized distance estimator produced no valid witness."""


class InconsistentSyndrome(ValueError):
    """The syndrome is not in the column space of the check matrix."""


class BasisError(ValueError):
    """A memory experiment was requested for a code without logical qubits."""
