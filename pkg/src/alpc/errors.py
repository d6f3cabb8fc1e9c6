"""Exception types shared across the package."""


class AlpcError(Exception):
    """Base class for every error raised by alpc."""


class ParseError(AlpcError):
    def __init__(self, message, line, column, expected=()):
        self.line = line
        self.column = column
        self.expected = tuple(sorted(set(expected)))
        detail = f"{message} at line {line}, column {column}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)


class WellFormednessError(AlpcError):
    """Raised when an awareness/explicit-knowledge chain violates the nesting rule."""

    def __init__(self, outer, inner):
        self.outer = outer
        self.inner = inner
        super().__init__(
            f"chain [{inner}] occurs inside the scope of [{outer}] but [{outer}] is not a prefix of it"
        )


class ModelError(AlpcError):
    """Model description failed validation; `violations` lists every problem found."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid model:\n  - " + "\n  - ".join(self.violations))


class UnknownSymbolError(AlpcError):
    """A world, agent or chain is not part of the model or bounds."""


class BoundsError(AlpcError):
    pass


class ProofFormatError(AlpcError):
    pass
