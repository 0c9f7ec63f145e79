"""Off-chain fairness worker: content-addressed storage and integrity hashing.

The store is an in-process IPFS stand-in: blobs are addressed by the
Keccak-256 of their bytes (a deliberate simplification of real CIDs, which
are multihashes). Cumulative-score checkpoints are serialized canonically,
stored as blobs, and anchored on-chain by (CID, integrity hash).
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .errors import DuplicateClient, WrongRound
from .keccak import keccak256
from .numerics import Fixed, GradientVector


def canonical_json_bytes(obj) -> bytes:
    """Deterministic JSON encoding: sorted keys, no whitespace, ASCII only."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True).encode()


def vector_commit(vector: GradientVector) -> str:
    """Short hex commitment to a vector, for state documents and tx digests.

    SHA-256 (not Keccak) on purpose: vectors can run to 10^5 components and
    this digest is internal plumbing, recomputable from the stored vector.
    """
    header = vector.dim.to_bytes(4, "big")
    return hashlib.sha256(header + vector.encode()).hexdigest()


def canonical_serialize(cumulative: Sequence[tuple[bytes, Fixed]]) -> bytes:
    """Canonical byte form of a cumulative-score list.

    Entries sorted ascending by 20-byte client id, each encoded as
    id || raw score as signed 128-bit big-endian. No separators, so the
    encoding is injective for distinct (id, value) sets of this shape.
    """
    seen = set()
    for client_id, _ in cumulative:
        if len(client_id) != 20:
            raise ValueError(f"client id must be 20 bytes, got {len(client_id)}")
        if client_id in seen:
            raise DuplicateClient(f"duplicate client id 0x{client_id.hex()}")
        seen.add(client_id)
    parts = []
    for client_id, value in sorted(cumulative, key=lambda e: e[0]):
        parts.append(client_id + value.raw.to_bytes(16, "big", signed=True))
    return b"".join(parts)


def deserialize_cumulative(blob: bytes) -> list[tuple[bytes, Fixed]]:
    """Inverse of canonical_serialize."""
    if len(blob) % 36 != 0:
        raise ValueError("cumulative blob length must be a multiple of 36")
    out = []
    for offset in range(0, len(blob), 36):
        client_id = blob[offset : offset + 20]
        raw = int.from_bytes(blob[offset + 20 : offset + 36], "big", signed=True)
        out.append((client_id, Fixed(raw)))
    return out


class ContentStore:
    """Append-only content-addressed blob store; CID == keccak256(blob)."""

    def __init__(self) -> None:
        self._blobs: dict[bytes, bytes] = {}

    def put(self, blob: bytes) -> bytes:
        cid = keccak256(blob)
        self._blobs.setdefault(cid, blob)
        return cid

    def get(self, cid: bytes) -> Optional[bytes]:
        return self._blobs.get(cid)

    def __contains__(self, cid: bytes) -> bool:
        return cid in self._blobs

    def __len__(self) -> int:
        return len(self._blobs)

    def cids(self) -> list[bytes]:
        return sorted(self._blobs)


@dataclass(frozen=True)
class FairnessCheckpoint:
    """Periodic off-chain record of cumulative scores, anchored on-chain."""

    through_round: int
    cumulative: tuple[tuple[bytes, Fixed], ...]
    cid: bytes
    integrity_hash: bytes


@dataclass(frozen=True)
class CheckpointVerdict:
    ok: bool
    reason: Optional[str] = None  # NotFound | CidMismatch | HashMismatch | ContentMismatch

    def __bool__(self) -> bool:
        return self.ok


def publish_checkpoint(
    store: ContentStore,
    through_round: int,
    cumulative: Mapping[bytes, Fixed] | Sequence[tuple[bytes, Fixed]],
    fairness_interval: int,
) -> FairnessCheckpoint:
    """Serialize cumulative scores, store the blob, and hash it for anchoring.

    Only fires on rounds that are a multiple of the fairness interval; the
    caller records (cid, integrity_hash) on-chain as a system transaction.
    """
    if through_round <= 0 or through_round % fairness_interval != 0:
        raise WrongRound(
            f"round {through_round} is not a multiple of interval {fairness_interval}"
        )
    entries = sorted(cumulative.items()) if isinstance(cumulative, Mapping) else sorted(cumulative)
    blob = canonical_serialize(entries)
    cid = store.put(blob)
    integrity_hash = keccak256(blob)
    return FairnessCheckpoint(
        through_round=through_round,
        cumulative=tuple(entries),
        cid=cid,
        integrity_hash=integrity_hash,
    )


def verify_checkpoint(
    checkpoint: FairnessCheckpoint,
    store: ContentStore,
    onchain_hash: Optional[bytes] = None,
) -> CheckpointVerdict:
    """Re-verify a checkpoint: CID resolves, hashes agree, content matches."""
    blob = store.get(checkpoint.cid)
    if blob is None:
        return CheckpointVerdict(False, "NotFound")
    if keccak256(blob) != checkpoint.cid:
        return CheckpointVerdict(False, "CidMismatch")
    if keccak256(blob) != checkpoint.integrity_hash:
        return CheckpointVerdict(False, "HashMismatch")
    if onchain_hash is not None and onchain_hash != checkpoint.integrity_hash:
        return CheckpointVerdict(False, "HashMismatch")
    if blob != canonical_serialize(list(checkpoint.cumulative)):
        return CheckpointVerdict(False, "ContentMismatch")
    return CheckpointVerdict(True)
