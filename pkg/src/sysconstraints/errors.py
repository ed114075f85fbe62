"""Exception types shared across the package."""


class ValidationError(ValueError):
    """An input violates a documented invariant."""


class DomainError(ValueError):
    """An argument lies outside the domain of a function."""


class NoChannelError(ValueError):
    """Two alphabets share no element, so no channel exists between them."""


class SupersetViolation(ValueError):
    """A capability tree update drops something its predecessor had."""


class ParseError(ValueError):
    """A byte sequence is not a well-formed etiquette message."""

    def __init__(self, offset: int, reason: str):
        self.offset = offset
        self.reason = reason
        super().__init__(f"at byte {offset}: {reason}")
