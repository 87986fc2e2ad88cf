"""Exception types shared across the solver modules."""


class SingularMatrix(Exception):
    """A direct solve hit a pivot below the singularity threshold."""


class NotConverged(Exception):
    """An iterative computation exhausted its iteration budget."""


class DimensionMismatch(Exception):
    """Operands have incompatible shapes."""


class SingularSaddleSystem(Exception):
    """The coupled interface system is singular.

    Typically signals redundant constraints or an inconsistent
    system/subdomain time-step configuration.
    """


class ConfigError(Exception):
    """A run configuration could not be parsed or validated."""
