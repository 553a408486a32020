"""
Exception hierarchy shared by every trulr module.

Everything raised on purpose derives from TrulrError so that callers
(the CLI in particular) can tell domain failures apart from bugs. Errors
with extra constructor arguments define __reduce__ so they survive the trip
back from a worker process.
"""


class TrulrError(Exception):
    """Base class for errors raised by trulr."""


class InvalidParameterError(TrulrError, ValueError):
    pass


class AbsoluteContinuityError(TrulrError, ValueError):
    """Behavior measure puts zero mass where the target puts positive mass."""


class DivergenceUndefinedError(TrulrError, ValueError):
    """The alpha-divergence is infinite (or undefined) for this alpha."""

    def __init__(self, condition):
        super().__init__(f"divergence undefined for this alpha: {condition}")
        self.condition = condition

    def __reduce__(self):
        return (type(self), (self.condition,))


class UnsupportedOperationError(TrulrError, NotImplementedError):
    pass


class NumericOverflowError(TrulrError, ArithmeticError):
    def __init__(self, message, max_log_weight):
        super().__init__(f"{message} (max log-weight={max_log_weight:.6g})")
        self.message = message
        self.max_log_weight = max_log_weight

    def __reduce__(self):
        return (type(self), (self.message, self.max_log_weight))


class BoundaryConstraintError(TrulrError, ValueError):
    """Parameters fall outside the region where a truncation rule is valid."""


class MissingConstantsError(TrulrError, KeyError):
    def __init__(self, what, missing):
        self.what = what
        self.missing = tuple(missing)
        super().__init__(f"{what} requires: {', '.join(self.missing)}")

    def __str__(self):
        return self.args[0]

    def __reduce__(self):
        return (type(self), (self.what, self.missing))


class ConstructionInfeasibleError(TrulrError, RuntimeError):
    pass


class ConfigError(TrulrError, ValueError):
    pass


class DatasetFormatError(TrulrError, ValueError):
    def __init__(self, line_number, message):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number
        self.message = message

    def __reduce__(self):
        return (type(self), (self.line_number, self.message))


class ReplicationError(TrulrError, RuntimeError):
    def __init__(self, rep_index, cause):
        super().__init__(f"replication {rep_index} failed: {cause!r}")
        self.rep_index = rep_index
        self.cause = cause

    def __reduce__(self):
        return (type(self), (self.rep_index, self.cause))
