"""Error taxonomy shared across the package."""

from __future__ import annotations


class EqcheckError(Exception):
    """Base class for all package errors."""


class ExprError(EqcheckError):
    """Expression-level error carrying a byte offset into the source text."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class ExprSyntaxError(ExprError):
    pass


class UnknownIdentifierError(ExprError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier {name!r}", offset)
        self.name = name


class ArityError(ExprError):
    def __init__(self, name: str, count: int, offset: int):
        super().__init__(f"{name}() takes 1 argument, got {count}", offset)
        self.name = name


class NonConstantExponentError(ExprError):
    def __init__(self, offset: int):
        super().__init__("exponent must be a constant expression", offset)


class EvalDomainError(EqcheckError):
    """Evaluation left the domain of a partial function (div, log, sqrt, pow)."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class ManifoldFormatError(EqcheckError):
    """Structural problem in a manifold document; ``path`` locates the field."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class ManifoldValidationError(EqcheckError):
    """Semantic problem: positivity, domain constraints, bad sample points."""


class UnknownFieldError(EqcheckError):
    def __init__(self, kind: str, name: str):
        super().__init__(f"no {kind} named {name!r} in this manifold")
        self.name = name


class DegeneratePlaneError(EqcheckError):
    pass


class CheckPreconditionError(EqcheckError):
    """A check's stated precondition fails (degenerate inputs, wrong dimension)."""
