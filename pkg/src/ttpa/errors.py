"""Shared exception types.

Everything derives from ValueError so callers that only care about
"bad input" can catch one thing; the CLI maps these to exit code 2.
"""


class InputShapeError(ValueError):
    """A bit vector, matrix, or circuit input has the wrong width or values."""


class CircuitFormatError(ValueError):
    """A netlist (in-memory or JSON) violates the circuit format rules."""


class MalformedCiphertextError(ValueError):
    """A ciphertext index/nonce is outside the range the key admits."""


class UnsupportedSchemeError(ValueError):
    """The operation is undefined for this encryption scheme (no small circuit)."""


class OneShotViolationError(RuntimeError):
    """A single-use decoder oracle was queried more than once."""


class FileFormatError(ValueError):
    """An on-disk artifact (database, codebook, key set) failed to parse."""


class SanitizerFailure(RuntimeError):
    """The wrapped sanitizer errored while answering a tracing batch.

    Experiment runners record this as an availability violation for the
    trial instead of aborting the whole run.
    """
