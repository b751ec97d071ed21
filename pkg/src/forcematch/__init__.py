"""Stable matching engine and synthesis of preference lists that force a target matching."""
from .errors import (ContractViolation, DivorceLoopError, DomainError, MalformedInputError,
                     MalformedStateError, OracleLimitError, WrongEntryPointError)
from .model import Instance, Matching, parse_instance, parse_matching, format_instance, format_matching

__all__ = [
    "ContractViolation", "DivorceLoopError", "DomainError", "MalformedInputError",
    "MalformedStateError", "OracleLimitError", "WrongEntryPointError",
    "Instance", "Matching", "parse_instance", "parse_matching", "format_instance", "format_matching",
]
