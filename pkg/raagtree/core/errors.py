from __future__ import annotations


class RaagTreeError(ValueError):
    """Base class for every error the library raises on bad input or exceeded budgets."""


class NotATree(RaagTreeError):
    pass


class BadLabel(RaagTreeError):
    pass


class TooSmall(RaagTreeError):
    pass


class TooLarge(RaagTreeError):
    pass


class NonzeroConstantTerm(RaagTreeError):
    pass


class BadF(RaagTreeError):
    pass


class MalformedPair(RaagTreeError):
    pass


class DivByZero(RaagTreeError, ZeroDivisionError):
    pass


class UsageError(RaagTreeError):
    def __init__(self, message: str, *, flag: str | None = None) -> None:
        super().__init__(message)
        self.flag = flag
