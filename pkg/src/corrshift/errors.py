"""Exception hierarchy shared by every stage of the analysis."""


class CorrshiftError(Exception):
    """Base class for all errors raised by this package."""


class InsufficientDataError(CorrshiftError, ValueError):
    pass


class RejectedInputError(CorrshiftError, ValueError):
    pass


class NoOverlapError(CorrshiftError, ValueError):
    pass


class ParseError(CorrshiftError, ValueError):
    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class IntegrityError(CorrshiftError, ValueError):
    pass


class ConfigError(CorrshiftError, ValueError):
    pass


class DomainError(CorrshiftError, ValueError):
    pass


class SetupError(CorrshiftError, ValueError):
    pass


class SingularDesignError(CorrshiftError, ValueError):
    def __init__(self, message, which=None):
        self.which = which
        super().__init__(message if which is None else f"{which} fit: {message}")


class DegenerateInputError(CorrshiftError, ValueError):
    pass


class WindowError(CorrshiftError, ValueError):
    pass


class LookupFailure(CorrshiftError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class NonConvergenceError(CorrshiftError, RuntimeError):
    """Optimizer gave up; ``best`` holds the best point it found."""

    def __init__(self, message, best=None, context=None):
        self.best = best
        self.context = context
        if context:
            message = f"{context}: {message}"
        super().__init__(message)


class NumericalDegeneracyError(CorrshiftError, ArithmeticError):
    pass
