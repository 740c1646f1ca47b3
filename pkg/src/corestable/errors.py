"""Exception hierarchy for corestable."""


class CoreStableError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInstanceError(CoreStableError, ValueError):
    """An instance violates one of its structural invariants."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "invalid instance")


class InvalidCommitteeError(CoreStableError, ValueError):
    pass


class InvalidLotteryError(CoreStableError, ValueError):
    pass


class InfeasibleCommitteeError(CoreStableError, ValueError):
    """A committee (or a lottery support member) exceeds the weight limit."""


class UnsupportedCommitteeError(CoreStableError, KeyError):
    """A committee lies outside the universe of an explicit score table."""

    def __str__(self):
        return str(self.args[0]) if self.args else "unsupported committee"


class DegenerateBlockerError(CoreStableError):
    """A zero-weight committee is strictly preferred by at least one voter."""


class DegenerateAttackerError(CoreStableError):
    pass


class InstanceTooLargeError(CoreStableError):
    """An exhaustive enumeration would exceed the configured guard."""


class ConvergenceError(CoreStableError):
    """The MWU solver failed to certify its lottery.

    Attributes
    ----------
    lottery : Lottery
        Best lottery found across all attempts.
    measured_c : float
        Its worst blocking ratio at the requested blocker bound.
    """

    def __init__(self, message, lottery=None, measured_c=None):
        super().__init__(message)
        self.lottery = lottery
        self.measured_c = measured_c


class TheoremViolationError(CoreStableError, AssertionError):
    """A guaranteed-existence result failed to materialise; indicates a bug."""
