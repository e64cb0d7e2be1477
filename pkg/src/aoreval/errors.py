"""Exception hierarchy.

Everything raised on bad input derives from :class:`AorEvalError`; the CLI
maps :class:`ConfigError` to exit status 2 and every other subclass to 1.
"""


class AorEvalError(Exception):
    exit_code = 1


class ConfigError(AorEvalError):
    exit_code = 2


class GeometryError(AorEvalError, ValueError):
    pass


class NonConvexPolygon(GeometryError):
    pass


class ParseError(AorEvalError, ValueError):
    def __init__(self, line, reason, source=None):
        self.line = line
        self.reason = reason
        self.source = source
        where = f"{source}:{line}" if source else f"line {line}"
        super().__init__(f"{where}: {reason}")


class ManifestError(AorEvalError, ValueError):
    pass


class AlignmentError(AorEvalError, ValueError):
    pass


class EmptySeries(AorEvalError, ValueError):
    pass


class EmptyInput(AorEvalError, ValueError):
    pass


class DuplicateSequence(AorEvalError, ValueError):
    pass


class MissingSequence(AorEvalError, ValueError):
    pass


class TaskSetMismatch(AorEvalError, ValueError):
    pass


class TooFewTasks(AorEvalError, ValueError):
    pass


class NotAPermutation(AorEvalError, ValueError):
    pass
