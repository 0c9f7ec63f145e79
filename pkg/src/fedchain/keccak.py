"""Keccak-256 as used by Ethereum.

This is the original Keccak sponge (multi-rate padding, domain byte 0x01),
not NIST SHA3-256 (domain byte 0x06): rate 1088 bits, capacity 512, 24
rounds, 256-bit digest. State is kept as a flat list of 25 lanes indexed
x + 5*y.
"""
from __future__ import annotations

_MASK = (1 << 64) - 1
_RATE = 136  # bytes

_ROUND_CONSTANTS = (
    0x0000000000000001, 0x0000000000008082, 0x800000000000808A, 0x8000000080008000,
    0x000000000000808B, 0x0000000080000001, 0x8000000080008081, 0x8000000000008009,
    0x000000000000008A, 0x0000000000000088, 0x0000000080008009, 0x000000008000000A,
    0x000000008000808B, 0x800000000000008B, 0x8000000000008089, 0x8000000000008003,
    0x8000000000008002, 0x8000000000000080, 0x000000000000800A, 0x800000008000000A,
    0x8000000080008081, 0x8000000000008080, 0x0000000080000001, 0x8000000080008008,
)

# rho rotation offset for flat lane index x + 5*y
_ROTATION = (
    0, 1, 62, 28, 27,
    36, 44, 6, 55, 20,
    3, 10, 43, 25, 39,
    41, 45, 15, 21, 8,
    18, 2, 61, 56, 14,
)

# rho+pi as a gather: lane j of the permuted state comes from _PI_SOURCE[j]
# rotated left by _PI_ROT[j].  dst(x, y) = y + 5*((2x + 3y) mod 5).
_PI_SOURCE = [0] * 25
_PI_ROT = [0] * 25
for _x in range(5):
    for _y in range(5):
        _src = _x + 5 * _y
        _dst = _y + 5 * ((2 * _x + 3 * _y) % 5)
        _PI_SOURCE[_dst] = _src
        _PI_ROT[_dst] = _ROTATION[_src]
_PI_SOURCE = tuple(_PI_SOURCE)
_PI_ROT = tuple(_PI_ROT)

_CHI_1 = tuple(((i % 5) + 1) % 5 + 5 * (i // 5) for i in range(25))
_CHI_2 = tuple(((i % 5) + 2) % 5 + 5 * (i // 5) for i in range(25))
_GATHER = tuple(zip(_PI_SOURCE, _PI_ROT))
_CHI = tuple(zip(range(25), _CHI_1, _CHI_2))


def _permute(lanes: list[int]) -> list[int]:
    for rc in _ROUND_CONSTANTS:
        # theta
        c = [
            lanes[x] ^ lanes[x + 5] ^ lanes[x + 10] ^ lanes[x + 15] ^ lanes[x + 20]
            for x in range(5)
        ]
        d = [
            c[(x + 4) % 5] ^ (((c[(x + 1) % 5] << 1) | (c[(x + 1) % 5] >> 63)) & _MASK)
            for x in range(5)
        ]
        lanes = [lanes[i] ^ d[i % 5] for i in range(25)]
        # rho + pi
        b = [
            ((lanes[s] << r) | (lanes[s] >> (64 - r))) & _MASK if r else lanes[s]
            for s, r in _GATHER
        ]
        # chi
        lanes = [b[i] ^ (~b[j] & b[k] & _MASK) for i, j, k in _CHI]
        # iota
        lanes[0] ^= rc
    return lanes


def keccak256(data: bytes) -> bytes:
    """32-byte Keccak-256 digest of ``data``."""
    padlen = _RATE - len(data) % _RATE
    if padlen == 1:
        padded = data + b"\x81"
    else:
        padded = data + b"\x01" + b"\x00" * (padlen - 2) + b"\x80"
    lanes = [0] * 25
    for offset in range(0, len(padded), _RATE):
        block = padded[offset : offset + _RATE]
        for i in range(17):
            lanes[i] ^= int.from_bytes(block[8 * i : 8 * i + 8], "little")
        lanes = _permute(lanes)
    return b"".join(lanes[i].to_bytes(8, "little") for i in range(4))


def keccak256_hex(data: bytes) -> str:
    return keccak256(data).hex()
