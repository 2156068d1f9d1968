"""Exception hierarchy shared by every layer of the package."""


class ChoreoError(Exception):
    """Base class for all errors raised by this package."""


class EmptyCensusError(ChoreoError):
    """A party set that must be non-empty was empty."""


class DuplicateLocationError(ChoreoError):
    """The same location name appeared twice in one census."""


class NotAMemberError(ChoreoError):
    """Membership witness requested for a location outside the census."""


class NotASubsetError(ChoreoError):
    """Subset witness requested for a census that is not contained in another."""


class WitnessMismatchError(ChoreoError):
    """A witness was used against a census it was not constructed for."""


class EncodeError(ChoreoError):
    """Value cannot be encoded under the portable grammar."""


class DecodeError(ChoreoError):
    """Byte string is not a well-formed portable encoding."""


class UnwrapAbsentError(ChoreoError):
    """Attempt to read a located value at an endpoint that does not own it."""


class NotAnOwnerError(ChoreoError):
    """A send was attempted by a location that does not own the value."""


class CensusNotOwnedError(ChoreoError):
    """`naked` needs the whole current census to own the value."""


class ContractError(ChoreoError):
    """A choreography or caller broke an operator contract (wrong shapes,
    wrong owner sets, misuse of a pure body)."""


class InputExhaustedError(ChoreoError):
    """A location's input stream ran out of values."""


class TransportError(ChoreoError):
    """Connection or I/O failure in a message transport."""


class StepBudgetExceeded(ChoreoError):
    """The simulated run stalled or ran past its scheduler step budget.

    Signals a potential deadlock or livelock; always a test failure.
    """


class EmptyFoldError(ChoreoError):
    """xor fold over an empty sequence."""


class CommitmentFailed(ChoreoError):
    """An opened lottery value does not match its published commitment."""


class ConfigError(ChoreoError):
    """Bad or incomplete harness configuration."""


class RunAborted(ChoreoError):
    """Endpoint never produced a result because a centralized run failed at
    another endpoint."""
