"""Exception types shared across the package."""


class NontermError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(NontermError, ValueError):
    """Malformed rule, term, automaton or DIMACS text."""

    def __init__(self, message, text=None, position=None):
        self.text = text
        self.position = position
        if position is not None:
            message = f"{message} (at offset {position})"
        super().__init__(message)


class UnknownSymbol(ParseError):
    """A term mentions an identifier other than the combinator."""


class InvalidRule(NontermError, ValueError):
    """A rule is erasing, non-linear, or mentions unknown variables."""


class InvalidInput(NontermError, ValueError):
    """An operation's precondition does not hold."""


class SizeLimit(NontermError):
    """A subset construction exceeded its configured bound."""


class ModelInconsistent(NontermError):
    """A solver model is partial or violates the instance it came from."""


class SpawnError(NontermError, OSError):
    """The external solver executable could not be started."""


class ValidationFailure(NontermError):
    """A counterexample failed bounded re-validation."""

    def __init__(self, message, term=None, step=None):
        self.term = term
        self.step = step
        super().__init__(message)


class InternalError(NontermError):
    """An encoder/decoder invariant was violated (a bug, not a search miss)."""
