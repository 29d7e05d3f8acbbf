class ForgeError(Exception):
    """Base class for errors raised by peephole_forge."""


class PatternError(ForgeError):
    """A pattern file is malformed or a pattern violates a semantic rule."""

    def __init__(self, message, pos=None, pattern=None):
        self.message = message
        self.pos = pos
        self.pattern = pattern
        where = f"{pos}: " if pos is not None else ""
        who = f"{pattern}: " if pattern else ""
        super().__init__(f"{where}{who}{message}")


class PatternSyntaxError(PatternError):
    pass


class UnsupportedPattern(ForgeError):
    """The pattern is valid but the requested artifact cannot be produced."""


class SolverError(ForgeError):
    """The external SMT solver is missing or spoke an unexpected protocol."""


class LexError(ForgeError):
    """Text contains a character no token can start with."""
