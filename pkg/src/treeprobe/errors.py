"""Exception hierarchy shared by all modules."""


class TreeProbeError(Exception):
    """Base class for errors raised by treeprobe."""


class DomainError(TreeProbeError, ValueError):
    """An argument lies outside the operation's domain."""


class CapExceeded(DomainError):
    """An exhaustive operation was asked for an n above its resource cap."""


class BudgetExhausted(TreeProbeError):
    """A query was asked after the session budget was used up."""


class ProtocolError(TreeProbeError):
    """A game was driven out of order, e.g. queried after it ended."""


class DecodeError(TreeProbeError):
    """Answers cannot come from any tree; ``rule`` names the failed check."""

    def __init__(self, rule, message=""):
        super().__init__(f"{rule}: {message}" if message else rule)
        self.rule = rule


class InvariantViolation(TreeProbeError, AssertionError):
    """A structural guarantee failed (would falsify a proven bound)."""
