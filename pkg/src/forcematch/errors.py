"""Exception types shared across the package."""


class MalformedInputError(ValueError):
    """Bad text input or an out-of-range / duplicate participant id."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DomainError(ValueError):
    """An operation's precondition does not hold for the given input."""


class WrongEntryPointError(DomainError):
    """The input is valid but belongs to a different synthesis routine."""


class ContractViolation(RuntimeError):
    """An internal invariant failed; indicates a bug or a violated precondition."""


class OracleLimitError(RuntimeError):
    """A brute-force search space is larger than the allowed limit."""

    def __init__(self, what, size, limit):
        self.size = size
        self.limit = limit
        super().__init__(f"{what}: search space {size} exceeds limit {limit}")


class DivorceLoopError(RuntimeError):
    """A divorce simulation exceeded the maximal possible number of divorces."""


class MalformedStateError(ValueError):
    """A provisional state that no deferred-acceptance run can be in."""
