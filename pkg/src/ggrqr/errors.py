"""Exception types raised across the package."""


class ContractError(ValueError):
    """An operand violated a documented precondition (usually a shape)."""


class UnsupportedShapeError(ValueError):
    """The factorization routines require rows >= cols."""


class MatrixParseError(ValueError):
    """A matrix file could not be parsed.

    ``kind`` is one of ``header``, ``token``, ``count`` or ``value`` and
    ``line`` is the 1-based line number in the offending file.
    """

    def __init__(self, kind, line, message):
        self.kind = kind
        self.line = line
        super().__init__(f"line {line}: {kind} error: {message}")


class GridConfigError(ValueError):
    """Invalid tile grid configuration."""


class WorkerError(RuntimeError):
    """A tile worker failed; the parallel run was aborted."""
