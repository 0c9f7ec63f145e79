"""The simulated smart contract: registration and staking, batched update
submission, validation, scoring and reward payout, FedAvg aggregation, and
periodic checkpoint anchoring.

Each protocol round walks the phase machine open -> scored -> aggregated ->
closed; no operation succeeds out of order. All numeric state is
fixed-point, so two replays of the same transaction sequence produce
identical state roots.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from . import incentives
from .errors import (
    AlreadyRegistered,
    Banned,
    BadSampleCount,
    DimMismatch,
    DuplicateSubmission,
    InsufficientStake,
    NoAcceptedUpdates,
    NotAuthorized,
    NothingToValidate,
    NotRegistered,
    OutOfOrderBatch,
    RoundClosed,
    SimulationError,
    WrongPhase,
    WrongRound,
)
from .numerics import (
    ZERO,
    Fixed,
    GradientVector,
    div_toward_zero,
    norm_sq,
    sample_weighted_mean,
    SCALE,
)
from .offchain import vector_commit

SYSTEM_SENDER = b"\x00" * 20

VERDICT_ACCEPTED = "accepted"
VERDICT_REJECTED_NORM = "rejected_norm"
VERDICT_REJECTED_DIM = "rejected_dim"


class Phase(enum.IntEnum):
    OPEN = 0
    SCORED = 1
    AGGREGATED = 2
    CLOSED = 3


@dataclass
class ClientRecord:
    id: bytes
    stake: int
    n_samples: int
    registered_round: int
    rounds_participated: int = 0
    consecutive_negative: int = 0
    banned: bool = False


@dataclass
class RoundState:
    round: int
    phase: Phase = Phase.OPEN
    submissions: dict[bytes, GradientVector] = field(default_factory=dict)
    partial: dict[bytes, dict] = field(default_factory=dict)  # id -> {count, parts}
    verdicts: dict[bytes, str] = field(default_factory=dict)
    accepted: list[bytes] = field(default_factory=list)
    scores: dict[bytes, Fixed] = field(default_factory=dict)
    payouts: dict[bytes, int] = field(default_factory=dict)
    aggregate: Optional[GradientVector] = None
    validated: bool = False


class Coordinator:
    """Contract state machine; executes only inside the ledger's tx loop."""

    def __init__(
        self,
        dim: int,
        min_stake: int = 100,
        tau: Fixed = Fixed.from_decimal("10.0"),
        ban_threshold: int = 3,
        slash_fraction: Fixed = Fixed.from_decimal("0.5"),
        reward_pool: int = 1_000_000,
        alpha: Fixed = Fixed.from_decimal("0.5"),
        fairness_interval: int = 5,
        reward_basis: str = "alignment",
    ):
        if dim < 1:
            raise ValueError("model dimension must be positive")
        if reward_basis not in ("alignment", "shapley"):
            raise ValueError(f"unknown reward basis {reward_basis!r}")
        self.dim = dim
        self.min_stake = min_stake
        self.tau = tau
        self.ban_threshold = ban_threshold
        self.slash_fraction = slash_fraction
        self.reward_pool = reward_pool
        self.alpha = alpha
        self.fairness_interval = fairness_interval
        self.reward_basis = reward_basis

        self.global_model = GradientVector.zeros(dim)
        self.model_version = 0
        self.clients: dict[bytes, ClientRecord] = {}
        self.rounds: dict[int, RoundState] = {1: RoundState(round=1)}
        self.current_round = 1
        self.last_checkpoint_round: Optional[int] = None
        self.checkpoints: dict[int, tuple[bytes, bytes]] = {}  # R -> (cid, H)
        self._events: list[tuple[str, dict]] = []

    # -- event plumbing ------------------------------------------------------

    def _emit(self, name: str, payload: dict) -> None:
        self._events.append((name, payload))

    def drain_events(self) -> list[tuple[str, dict]]:
        events, self._events = self._events, []
        return events

    def is_known(self, client_id: bytes) -> bool:
        return client_id in self.clients

    # -- dispatch (ledger entry point) ----------------------------------------

    def execute(self, op: str, sender: bytes, args: dict) -> None:
        if op == "register":
            self.register(sender, args["stake"], args["n_samples"])
            return
        if op == "submit_update":
            self.submit_update(
                sender,
                args["round"],
                GradientVector.from_raw(args["components"]),
                args["batch_index"],
                args["batch_count"],
            )
            return
        if sender != SYSTEM_SENDER:
            raise NotAuthorized(f"{op} is a coordinator-initiated call")
        if op == "validate_round":
            self.validate_round(args["round"])
        elif op == "score_and_reward_round":
            self.score_and_reward_round(args["round"])
        elif op == "aggregate_round":
            self.aggregate_round(args["round"])
        elif op == "record_checkpoint":
            self.record_checkpoint(
                args["round"], bytes.fromhex(args["cid"]), bytes.fromhex(args["hash"])
            )
        elif op == "close_round":
            self.close_round(args["round"])
        else:
            raise SimulationError(f"unknown contract call {op!r}")

    def gas_param_count(self, op: str, args: dict) -> int:
        if op == "submit_update":
            return len(args["components"])
        if op in ("validate_round", "aggregate_round"):
            return self.dim
        return 0

    # -- client lifecycle ------------------------------------------------------

    def register(self, client_id: bytes, stake: int, n_samples: int) -> None:
        if client_id in self.clients:
            raise AlreadyRegistered(f"0x{client_id.hex()}")
        if client_id == SYSTEM_SENDER or len(client_id) != 20:
            raise NotAuthorized("invalid client id")
        if stake < self.min_stake:
            raise InsufficientStake(f"stake {stake} < minimum {self.min_stake}")
        if n_samples <= 0:
            raise BadSampleCount(f"n_samples must be positive, got {n_samples}")
        self.clients[client_id] = ClientRecord(
            id=client_id,
            stake=stake,
            n_samples=n_samples,
            registered_round=self.current_round,
        )
        self._emit(
            "ClientRegistered",
            {"id": "0x" + client_id.hex(), "stake": stake, "n_samples": n_samples},
        )

    # -- round phase: open -------------------------------------------------------

    def submit_update(
        self,
        client_id: bytes,
        round_index: int,
        batch: GradientVector,
        batch_index: int,
        batch_count: int,
    ) -> None:
        state = self._round_for_submission(round_index)
        record = self.clients.get(client_id)
        if record is None:
            raise NotRegistered(f"0x{client_id.hex()}")
        if record.banned:
            raise Banned(f"0x{client_id.hex()}")
        if client_id in state.submissions:
            raise DuplicateSubmission("one submission per client per round")
        if batch_count < 1 or not 0 <= batch_index < batch_count:
            raise OutOfOrderBatch(f"batch {batch_index} of {batch_count}")

        buffer = state.partial.get(client_id)
        if buffer is None:
            buffer = {"count": batch_count, "parts": []}
            state.partial[client_id] = buffer
        if batch_count != buffer["count"] or batch_index != len(buffer["parts"]):
            raise OutOfOrderBatch(
                f"expected batch {len(buffer['parts'])} of {buffer['count']}, "
                f"got {batch_index} of {batch_count}"
            )
        buffer["parts"].append(batch)

        if len(buffer["parts"]) == buffer["count"]:
            components: list[Fixed] = []
            for part in buffer["parts"]:
                components.extend(part.components)
            if len(components) != self.dim:
                # leave the buffer exhausted; the client cannot complete this round
                raise DimMismatch(f"update dim {len(components)} != model dim {self.dim}")
            state.submissions[client_id] = GradientVector(tuple(components))
            del state.partial[client_id]
        self._emit(
            "UpdateSubmitted",
            {"id": "0x" + client_id.hex(), "round": round_index, "batch_index": batch_index},
        )

    def _round_for_submission(self, round_index: int) -> RoundState:
        state = self.rounds.get(round_index)
        if state is None or round_index != self.current_round or state.phase != Phase.OPEN:
            raise RoundClosed(f"round {round_index} is not open")
        return state

    # -- validation ---------------------------------------------------------------

    def validate_round(self, round_index: int) -> list[tuple[bytes, str]]:
        state = self._current_state(round_index, Phase.OPEN)
        if not state.submissions:
            raise NothingToValidate(f"round {round_index} has no complete submissions")
        norm_bound = self.tau * self.tau
        verdicts: dict[bytes, str] = {}
        accepted: list[bytes] = []
        for client_id in sorted(state.submissions):
            update = state.submissions[client_id]
            if update.dim != self.dim:
                verdicts[client_id] = VERDICT_REJECTED_DIM
            elif norm_sq(update) > norm_bound:
                verdicts[client_id] = VERDICT_REJECTED_NORM
            else:
                verdicts[client_id] = VERDICT_ACCEPTED
                accepted.append(client_id)
        state.verdicts = verdicts
        state.accepted = accepted
        state.validated = True
        return [(cid, verdicts[cid]) for cid in sorted(verdicts)]

    # -- scoring and payout ----------------------------------------------------------

    def score_and_reward_round(self, round_index: int) -> dict[bytes, int]:
        state = self._current_state(round_index, Phase.OPEN)
        if not state.validated and state.submissions:
            raise WrongPhase("validate the round before scoring")

        accepted = list(state.accepted)
        scores: dict[bytes, Fixed] = {}
        if accepted:
            vectors = [state.submissions[cid] for cid in accepted]
            counts = [self.clients[cid].n_samples for cid in accepted]
            total_samples = sum(counts)
            aggregate = sample_weighted_mean(vectors, counts)
            state.aggregate = aggregate
            for cid, vec, n_i in zip(accepted, vectors, counts):
                scores[cid] = incentives.alignment_score(vec, aggregate, n_i, total_samples)
        state.scores = scores

        basis = self._payout_basis(state, scores)
        payouts = _largest_remainder_split(self.reward_pool, basis)
        state.payouts = payouts

        self._emit(
            "AlignmentScoresUpdated",
            {
                "round": round_index,
                "scores": [["0x" + cid.hex(), scores[cid].raw] for cid in sorted(scores)],
            },
        )
        self._apply_negative_score_policy(round_index, scores)
        self._emit(
            "RewardsDistributed",
            {
                "round": round_index,
                "payouts": [
                    ["0x" + cid.hex(), payouts[cid]] for cid in sorted(payouts) if payouts[cid] > 0
                ],
            },
        )
        state.phase = Phase.SCORED
        return dict(payouts)

    def _payout_basis(self, state: RoundState, scores: dict[bytes, Fixed]) -> dict[bytes, Fixed]:
        """Positive payout weights: alignment scores (or Shapley values),
        consistency-adjusted in the rounds following a fairness checkpoint."""
        if self.reward_basis == "shapley" and scores:
            submissions = {cid: state.submissions[cid] for cid in state.accepted}
            n_map = {cid: self.clients[cid].n_samples for cid in state.accepted}
            attribution = incentives.shapley_exact(
                list(submissions),
                incentives.make_alignment_characteristic(submissions, n_map),
                characteristic="alignment",
            )
            raw_basis = attribution.values
        else:
            raw_basis = scores

        multiplier_on = (
            self.last_checkpoint_round is not None
            and self.last_checkpoint_round
            < state.round
            <= self.last_checkpoint_round + self.fairness_interval
        )
        basis: dict[bytes, Fixed] = {}
        for cid, value in raw_basis.items():
            if multiplier_on:
                value = incentives.consistency_adjusted_reward(
                    value, self.alpha, self.participation(cid)
                )
            basis[cid] = value
        return basis

    def _apply_negative_score_policy(self, round_index: int, scores: dict[bytes, Fixed]) -> None:
        """Streak bookkeeping: consistently negative scorers are slashed and
        banned. Rounds a client sits out leave the streak unchanged."""
        for cid in sorted(scores):
            record = self.clients[cid]
            if scores[cid].is_negative():
                record.consecutive_negative += 1
                if record.consecutive_negative >= self.ban_threshold and not record.banned:
                    slashed = div_toward_zero(record.stake * self.slash_fraction.raw, SCALE)
                    record.stake -= slashed
                    record.banned = True
                    self._emit("ClientBanned", {"id": "0x" + cid.hex(), "round": round_index})
            else:
                record.consecutive_negative = 0

    def participation(self, client_id: bytes) -> Fixed:
        """Share of closed rounds since registration the client participated in."""
        record = self.clients[client_id]
        elapsed = self.current_round - record.registered_round
        if elapsed <= 0:
            return ZERO
        return Fixed(div_toward_zero(record.rounds_participated * SCALE, elapsed))

    # -- aggregation -------------------------------------------------------------------

    def aggregate_round(self, round_index: int) -> GradientVector:
        state = self._current_state(round_index, Phase.SCORED)
        if not state.accepted:
            raise NoAcceptedUpdates(f"round {round_index} accepted no updates")
        # committed value is the same FedAvg the scores were computed against
        assert state.aggregate is not None
        self.global_model = state.aggregate
        self.model_version = round_index
        state.phase = Phase.AGGREGATED
        return state.aggregate

    # -- checkpoint anchoring ---------------------------------------------------------

    def record_checkpoint(self, through_round: int, cid: bytes, integrity_hash: bytes) -> None:
        if through_round != self.current_round:
            raise WrongRound(f"checkpoint for round {through_round} outside round")
        if through_round % self.fairness_interval != 0:
            raise WrongRound(
                f"round {through_round} is not a multiple of {self.fairness_interval}"
            )
        self.checkpoints[through_round] = (cid, integrity_hash)
        self.last_checkpoint_round = through_round
        self._emit(
            "FairnessCheckpoint",
            {"round": through_round, "cid": cid.hex(), "hash": integrity_hash.hex()},
        )

    # -- close -----------------------------------------------------------------------

    def close_round(self, round_index: int) -> RoundState:
        state = self.rounds.get(round_index)
        if state is None or round_index != self.current_round:
            raise WrongPhase(f"round {round_index} is not current")
        empty_round = state.phase == Phase.SCORED and not state.accepted
        if state.phase != Phase.AGGREGATED and not empty_round:
            raise WrongPhase(f"cannot close round in phase {state.phase.name}")
        for cid in state.accepted:
            self.clients[cid].rounds_participated += 1
        state.phase = Phase.CLOSED
        self.current_round = round_index + 1
        self.rounds[self.current_round] = RoundState(round=self.current_round)
        return state

    def _current_state(self, round_index: int, phase: Phase) -> RoundState:
        state = self.rounds.get(round_index)
        if state is None or round_index != self.current_round:
            raise WrongPhase(f"round {round_index} is not current")
        if state.phase != phase:
            raise WrongPhase(f"round {round_index} is {state.phase.name}, needs {phase.name}")
        return state

    # -- canonical state -----------------------------------------------------------------

    def state_dict(self) -> dict:
        """Canonical JSON-ready snapshot; hashed into every block's state root."""
        rounds = {}
        for r, state in self.rounds.items():
            rounds[str(r)] = {
                "phase": state.phase.name.lower(),
                "submissions": {
                    "0x" + cid.hex(): vector_commit(vec)
                    for cid, vec in sorted(state.submissions.items())
                },
                "pending_batches": {
                    "0x" + cid.hex(): len(buf["parts"]) for cid, buf in sorted(state.partial.items())
                },
                "verdicts": {
                    "0x" + cid.hex(): verdict for cid, verdict in sorted(state.verdicts.items())
                },
                "scores": {"0x" + cid.hex(): s.raw for cid, s in sorted(state.scores.items())},
                "payouts": {"0x" + cid.hex(): p for cid, p in sorted(state.payouts.items())},
                "aggregate": vector_commit(state.aggregate) if state.aggregate else None,
            }
        return {
            "current_round": self.current_round,
            "global_model": {
                "commit": vector_commit(self.global_model),
                "version": self.model_version,
                "dim": self.dim,
            },
            "clients": {
                "0x" + cid.hex(): {
                    "stake": rec.stake,
                    "n_samples": rec.n_samples,
                    "registered_round": rec.registered_round,
                    "rounds_participated": rec.rounds_participated,
                    "consecutive_negative": rec.consecutive_negative,
                    "banned": rec.banned,
                }
                for cid, rec in sorted(self.clients.items())
            },
            "checkpoints": {
                str(r): {"cid": cid.hex(), "hash": h.hex()}
                for r, (cid, h) in sorted(self.checkpoints.items())
            },
            "last_checkpoint_round": self.last_checkpoint_round,
        }


def _largest_remainder_split(pool: int, basis: dict[bytes, Fixed]) -> dict[bytes, int]:
    """Split ``pool`` proportionally to the positive basis values, exactly.

    Floor shares are topped up one unit at a time in order of largest
    remainder (ties broken by client id), so the sum equals the pool
    whenever any basis value is positive.
    """
    positive = {cid: b.raw for cid, b in basis.items() if b.raw > 0}
    payouts = {cid: 0 for cid in basis}
    if not positive or pool <= 0:
        return payouts
    total = sum(positive.values())
    remainders: list[tuple[int, bytes]] = []
    distributed = 0
    for cid in sorted(positive):
        share, remainder = divmod(pool * positive[cid], total)
        payouts[cid] = share
        distributed += share
        remainders.append((remainder, cid))
    leftover = pool - distributed
    remainders.sort(key=lambda item: (-item[0], item[1]))
    for _, cid in remainders[:leftover]:
        payouts[cid] += 1
    return payouts
