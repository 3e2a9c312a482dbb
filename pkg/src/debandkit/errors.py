"""Exception types shared across the package."""


class DebandError(Exception):
    """Base class for all debandkit errors."""


class ContractError(DebandError):
    """An operation was called with inputs violating its contract
    (bad dimensions, non-divisible sizes, mismatched buffers)."""


class AlignmentError(ContractError):
    """A tile grid cannot exactly cover the image; the caller must pad first."""
