"""Exception types and codec failure values shared across the package."""

from __future__ import annotations

from dataclasses import dataclass, field


class CosetSumError(Exception):
    """Base class for all package errors."""


class ConstructionError(CosetSumError):
    """Invalid construction parameters (e.g. composite modulus)."""


class DomainError(CosetSumError):
    """Operand outside the valid domain (e.g. inverse of zero)."""


class DimensionError(CosetSumError):
    """Mismatched vector/matrix dimensions or moduli."""


class BudgetError(CosetSumError):
    """An exhaustive enumeration would exceed the configured budget."""


class AxisError(CosetSumError):
    """Unknown, duplicated or overlapping probability axes."""


class ValidationError(CosetSumError):
    """A probability table or model instance violates its invariants."""


class ArgumentError(CosetSumError):
    """Invalid argument to a model constructor or CLI command."""


class NotSupportedError(CosetSumError):
    """Requested computation is out of scope (e.g. correlated sources)."""


class ParseError(CosetSumError):
    """Instance-file syntax error, with position information."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


# Codec failures are ordinary return values, not exceptions: the harness
# counts them per trial.


@dataclass(frozen=True)
class EncoderFailure:
    """No codeword in the indexed coset met the typicality test."""

    user: int
    reason: str = "no_typical_codeword_in_coset"


@dataclass(frozen=True)
class DecodeFailure:
    """Decoder declared an error instead of producing a message."""

    reason: str
    cosets: frozenset = field(default_factory=frozenset)

    def __bool__(self) -> bool:
        return False
