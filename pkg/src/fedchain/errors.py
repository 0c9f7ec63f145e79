"""Exception hierarchy shared across the simulator.

Any ``SimulationError`` raised while a contract call executes is turned into
a reverted receipt by the ledger; errors raised before execution starts
(nonce, unknown sender, config problems) propagate to the caller.
"""


class SimulationError(Exception):
    """Base class for all simulator errors."""

    @property
    def reason(self) -> str:
        return type(self).__name__


class ParseError(SimulationError, ValueError):
    """Malformed decimal string."""


class DimMismatch(SimulationError):
    """Vector dimensions disagree."""


class EmptyInput(SimulationError):
    """Operation requires at least one element."""


# --- ledger ---

class NonceError(SimulationError):
    """Transaction nonce is not the sender's next-in-sequence."""


class UnknownSender(SimulationError):
    """Non-registration call from an address the contract has never seen."""


# --- coordinator (contract reverts) ---

class AlreadyRegistered(SimulationError):
    pass


class InsufficientStake(SimulationError):
    pass


class BadSampleCount(SimulationError):
    pass


class NotRegistered(SimulationError):
    pass


class Banned(SimulationError):
    pass


class RoundClosed(SimulationError):
    pass


class OutOfOrderBatch(SimulationError):
    pass


class DuplicateSubmission(SimulationError):
    pass


class NothingToValidate(SimulationError):
    pass


class WrongPhase(SimulationError):
    pass


class NoAcceptedUpdates(SimulationError):
    pass


class WrongRound(SimulationError):
    pass


class NotAuthorized(SimulationError):
    """System-only call attempted by a regular client."""


# --- incentives ---

class TooManyClients(SimulationError):
    """Exact Shapley enumeration is capped at 12 players."""


class BadWeights(SimulationError):
    pass


class BadParticipation(SimulationError):
    pass


class MissingRounds(SimulationError):
    pass


# --- offchain ---

class DuplicateClient(SimulationError):
    pass


# --- scenario / cli ---

class ConfigError(SimulationError):
    pass


class MissingRun(SimulationError):
    pass
