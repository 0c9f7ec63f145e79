"""Incentive math: alignment scores, exact Shapley attribution, cumulative
fairness scores, and consistency multipliers.

Everything here is a pure function over fixed-point values, so results are
reproducible bit-for-bit and safe to recompute off-chain from the event log.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .errors import BadParticipation, BadWeights, MissingRounds, TooManyClients
from .numerics import (
    ONE,
    SCALE,
    ZERO,
    Fixed,
    GradientVector,
    div_toward_zero,
    dot,
    sample_weighted_mean,
)

SHAPLEY_MAX_CLIENTS = 12  # 2^n subset enumeration budget


def alignment_score(
    g_i: GradientVector, g_global: GradientVector, n_i: int, n_total: int
) -> Fixed:
    """Client alignment score: (g_i . g_global) * n_i / n_total.

    The sample-count ratio is applied multiply-before-divide so the only
    rounding beyond the dot product is one terminal truncation.
    """
    if not 0 < n_i <= n_total:
        raise BadWeights(f"need 0 < n_i <= n_total, got {n_i}/{n_total}")
    return dot(g_i, g_global).mul_div(n_i, n_total)


def cumulative_scores(
    history: Mapping[int, Mapping[bytes, Fixed]], through_round: int
) -> dict[bytes, Fixed]:
    """Exact per-client sums of alignment scores over rounds 1..through_round.

    Clients absent from a round contribute zero for that round.
    """
    if through_round < 1:
        raise MissingRounds("through_round must be >= 1")
    missing = [r for r in range(1, through_round + 1) if r not in history]
    if missing:
        raise MissingRounds(f"history missing rounds {missing}")
    totals: dict[bytes, Fixed] = {}
    for r in range(1, through_round + 1):
        for client_id, score in history[r].items():
            totals[client_id] = totals.get(client_id, ZERO) + score
    return totals


def consistency_multiplier(alpha: Fixed, participation: Fixed) -> Fixed:
    """(1 + alpha * participation); >= 1 for valid inputs."""
    if participation.raw < 0 or participation > ONE:
        raise BadParticipation(f"participation must lie in [0, 1], got {participation}")
    if alpha.raw < 0:
        raise BadParticipation(f"alpha must be >= 0, got {alpha}")
    return ONE + alpha * participation


def consistency_adjusted_reward(score: Fixed, alpha: Fixed, participation: Fixed) -> Fixed:
    """score * (1 + alpha * participation) with one terminal rounding.

    The whole product is carried in a wide integer and truncated once, so
    the result is within one ulp of the real-valued formula even for large
    scores. Negative inputs stay negative (the multiplier amplifies
    magnitude); payouts clamp at zero downstream.
    """
    consistency_multiplier(alpha, participation)  # validates the inputs
    scale_sq = SCALE * SCALE
    numerator = score.raw * (scale_sq + alpha.raw * participation.raw)
    return Fixed(div_toward_zero(numerator, scale_sq))


@dataclass(frozen=True)
class ShapleyAttribution:
    """Per-client Shapley values under a named characteristic function."""

    values: dict[bytes, Fixed]
    characteristic: str


def shapley_exact(
    clients: Sequence[bytes],
    coalition_value: Callable[[frozenset], Fixed],
    characteristic: str = "custom",
) -> ShapleyAttribution:
    """Exact Shapley values by full subset enumeration.

    phi_i = sum over T not containing i of
            |T|! (n-|T|-1)! / n! * (v(T+i) - v(T)).

    Marginals are accumulated with integer coalition weights and divided by
    n! once at the end, so each phi carries a single truncation.
    """
    ids = sorted(clients)
    n = len(ids)
    if n > SHAPLEY_MAX_CLIENTS:
        raise TooManyClients(f"{n} clients exceeds the {SHAPLEY_MAX_CLIENTS}-player cap")
    if len(set(ids)) != n:
        raise BadWeights("client ids must be distinct")

    # one evaluation per subset, memoized by bitmask
    values: dict[int, int] = {}

    def v_raw(mask: int) -> int:
        cached = values.get(mask)
        if cached is None:
            subset = frozenset(ids[k] for k in range(n) if mask >> k & 1)
            cached = coalition_value(subset).raw
            values[mask] = cached
        return cached

    factorial = [math.factorial(k) for k in range(n + 1)]
    phi: dict[bytes, Fixed] = {}
    for k, client_id in enumerate(ids):
        others = [j for j in range(n) if j != k]
        acc = 0
        for sub_mask in range(1 << (n - 1)):
            mask = 0
            for bit, j in enumerate(others):
                if sub_mask >> bit & 1:
                    mask |= 1 << j
            size = sub_mask.bit_count()
            weight = factorial[size] * factorial[n - size - 1]
            acc += weight * (v_raw(mask | 1 << k) - v_raw(mask))
        phi[client_id] = Fixed(div_toward_zero(acc, factorial[n]))
    return ShapleyAttribution(values=phi, characteristic=characteristic)


def coalition_value_alignment(
    subset: Iterable[bytes],
    submissions: Mapping[bytes, GradientVector],
    n_map: Mapping[bytes, int],
) -> Fixed:
    """Coalition usefulness: dot(FedAvg over subset, FedAvg over everyone).

    An inner-product proxy that needs no validation dataset: for a singleton
    it reduces to the client's alignment with the full aggregate, and for
    the grand coalition it is the squared norm of the aggregate. v({}) = 0.
    """
    members = sorted(subset)
    if not members:
        return ZERO
    full_ids = sorted(submissions)
    full_aggregate = sample_weighted_mean(
        [submissions[i] for i in full_ids], [n_map[i] for i in full_ids]
    )
    subset_aggregate = sample_weighted_mean(
        [submissions[i] for i in members], [n_map[i] for i in members]
    )
    return dot(subset_aggregate, full_aggregate)


def make_alignment_characteristic(
    submissions: Mapping[bytes, GradientVector], n_map: Mapping[bytes, int]
) -> Callable[[frozenset], Fixed]:
    """Bind submissions into a coalition-value function for shapley_exact."""

    def v(subset: frozenset) -> Fixed:
        return coalition_value_alignment(subset, submissions, n_map)

    return v


def attribution_record(
    round_index: int,
    client_id: bytes,
    score: Fixed,
    cumulative: Fixed,
    multiplier: Fixed,
    phi: Fixed | None = None,
) -> dict:
    """One attribution-log record; serialized as a JSON line."""
    return {
        "round": round_index,
        "client": "0x" + client_id.hex(),
        "S": score.to_decimal(),
        "phi": phi.to_decimal() if phi is not None else None,
        "cumulative": cumulative.to_decimal(),
        "multiplier": multiplier.to_decimal(),
    }


def write_attribution_log(path, records: Iterable[dict]) -> None:
    """JSON-lines export, one record per (round, client)."""
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n")
