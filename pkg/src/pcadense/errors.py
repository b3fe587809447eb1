"""Exception hierarchy shared across the toolkit."""


class PcadenseError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(PcadenseError):
    """Rejected input: bad dimensions, bad parameters, violated preconditions."""


class DegenerateTrainingSetError(PcadenseError):
    """Training corpus has zero variance; no basis can be learned."""


class NumericalError(PcadenseError):
    """A numerical routine failed (factorization, eigendecomposition)."""


class FormatError(PcadenseError):
    """Base class for serialization errors."""


class BadMagicError(FormatError):
    """File does not start with the expected magic / header tag."""


class TruncatedPayloadError(FormatError):
    """Declared sizes exceed the actual payload length."""


class InvariantViolationError(FormatError):
    """Payload decodes but the resulting object violates its invariants."""


class ParseError(FormatError):
    """Malformed text content; carries path and line context in the message."""
