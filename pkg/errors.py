"""Exception hierarchy shared by the library and the CLI."""

from config import EXIT_CODES


class DEExtensionError(Exception):
    """Base class for every failure raised by the library."""

    code = "EVALUATION_ERROR"
    exit_key = "evaluation_error"

    @property
    def exit_code(self):
        return EXIT_CODES[self.exit_key]


class InvalidInputError(DEExtensionError, ValueError):
    """Rejected constructor input (point off the sphere, bad rho, bad masses)."""

    code = "INVALID_POINT"


class ParseError(DEExtensionError):
    """Measure, map, points or grid text that does not follow its grammar."""

    code = "PARSE_ERROR"
    exit_key = "parse_error"

    def __init__(self, message, line=0, column=0):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class InadmissibleMeasureError(DEExtensionError):
    """A measure carries an atom of mass >= 1/2."""

    code = "INADMISSIBLE"
    exit_key = "inadmissible"

    def __init__(self, message, offender=None, mass=None):
        self.offender = offender
        self.mass = mass
        super().__init__(message)


class InadmissibleSampleError(InadmissibleMeasureError):
    """Half the quadrature mass collapsed onto one point under the sampled map."""

    code = "INADMISSIBLE_SAMPLE"


class NoConvergenceError(DEExtensionError):
    """The barycenter iteration ran out of iterations."""

    code = "NO_CONVERGENCE"
    exit_key = "no_convergence"

    def __init__(self, message, history=(), largest_atom=0.0, last_point=None):
        self.history = tuple(history)
        self.largest_atom = largest_atom
        self.last_point = last_point
        super().__init__(message)


class RadiusExceededError(DEExtensionError):
    code = "RADIUS_EXCEEDED"


class UnsupportedLevelError(DEExtensionError):
    code = "UNSUPPORTED_LEVEL"


class MapEvaluationError(DEExtensionError):
    code = "MAP_EVAL_ERROR"


class IndeterminateError(MapEvaluationError):
    """0/0 in a rational map after common roots were excluded."""

    code = "INDETERMINATE"


class SingularJacobianError(DEExtensionError):
    code = "SINGULAR_JW"
