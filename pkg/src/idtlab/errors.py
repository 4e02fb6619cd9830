"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command line front end:
1 for unreadable input, 2 for invalid meshes or arguments, 3 for numerical
and convergence failures.
"""


class IDTError(Exception):
    exit_code = 3


class ParseError(IDTError):
    exit_code = 1

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)


class ValidationError(IDTError):
    exit_code = 2


class NonTriangleFace(ValidationError):
    pass


class NonManifoldInput(ValidationError):
    pass


class DegenerateFace(ValidationError):
    pass


class BoundaryEdge(ValidationError):
    pass


class NotFlippable(ValidationError):
    pass


class NotDelaunay(ValidationError):
    pass


class IncompatibleData(ValidationError):
    pass


class FlipBudgetExceeded(IDTError):
    pass


class SolverFailure(IDTError):
    pass


class ZeroVoronoiArea(IDTError):
    pass


class DegenerateCollapse(IDTError):
    pass


class NotConverged(IDTError):
    """Raised when an iteration hits its budget; ``result`` holds the partial output."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
