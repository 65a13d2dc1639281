"""Exceptions raised by pricex.

Every error derives from ValueError so callers that only guard against bad
inputs keep working.
"""


class PricexError(ValueError):
    pass


class ConfigError(PricexError):
    pass


class OutOfRange(PricexError):
    pass


class AlignmentError(PricexError):
    pass


class EmptyCell(PricexError):
    pass


class NonConvergence(PricexError):
    pass


class Degenerate(PricexError):
    pass


class DimensionMismatch(PricexError):
    pass


class NumericalFailure(PricexError):
    pass


class UnknownLabel(PricexError, KeyError):
    pass


class ModelError(PricexError):
    pass


class SolveFailed(PricexError):
    pass


class MissingSubModel(PricexError):
    pass


class TooFewDays(PricexError):
    pass


class SchemaError(PricexError):
    """Raised once with every schema violation found in a bundle."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class CoverageError(PricexError):
    pass
