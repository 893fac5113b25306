"""Keccak-256 with original Keccak padding (0x01), the Ethereum variant.

This is NOT NIST SHA3-256: hashlib.sha3_256 pads with 0x06 and produces
different digests.  Nothing on PyPI-mirror here ships a C keccak, so the
digest is computed by a numba-compiled sponge (fast path, ~150 MiB/s) with
a pure-Python fallback.  Both absorb 136-byte blocks into a 5x5 lane state
and are cross-checked against each other and against published reference
vectors in the test suite.
"""

from __future__ import annotations

# A 32-byte digest.  Canonical text form is lowercase hex, 64 chars, no prefix.
Hash256 = bytes

ZERO_HASH: Hash256 = bytes(32)

_RATE = 136  # 1088-bit rate for 256-bit output

_ROUND_CONSTANTS = (
    0x0000000000000001, 0x0000000000008082, 0x800000000000808A, 0x8000000080008000,
    0x000000000000808B, 0x0000000080000001, 0x8000000080008081, 0x8000000000008009,
    0x000000000000008A, 0x0000000000000088, 0x0000000080008009, 0x000000008000000A,
    0x000000008000808B, 0x800000000000008B, 0x8000000000008089, 0x8000000000008003,
    0x8000000000008002, 0x8000000000000080, 0x000000000000800A, 0x800000008000000A,
    0x8000000080008081, 0x8000000000008080, 0x0000000080000001, 0x8000000080008008,
)

# Rotation offsets indexed [x][y].
_ROTATIONS = (
    (0, 36, 3, 41, 18),
    (1, 44, 10, 45, 2),
    (62, 6, 43, 15, 61),
    (28, 55, 25, 21, 56),
    (27, 20, 39, 8, 14),
)

_MASK = 0xFFFFFFFFFFFFFFFF


def _pad(data: bytes) -> bytearray:
    msg = bytearray(data)
    msg.append(0x01)
    while len(msg) % _RATE:
        msg.append(0x00)
    msg[-1] |= 0x80
    return msg


def _keccak_f_py(st: list[list[int]]) -> list[list[int]]:
    for rc in _ROUND_CONSTANTS:
        # theta
        c = [st[x][0] ^ st[x][1] ^ st[x][2] ^ st[x][3] ^ st[x][4] for x in range(5)]
        d = [
            c[(x - 1) % 5] ^ (((c[(x + 1) % 5] << 1) | (c[(x + 1) % 5] >> 63)) & _MASK)
            for x in range(5)
        ]
        st = [[st[x][y] ^ d[x] for y in range(5)] for x in range(5)]
        # rho + pi
        b = [[0] * 5 for _ in range(5)]
        for x in range(5):
            for y in range(5):
                n = _ROTATIONS[x][y]
                v = st[x][y]
                b[y][(2 * x + 3 * y) % 5] = ((v << n) | (v >> (64 - n))) & _MASK if n else v
        # chi
        st = [
            [b[x][y] ^ ((~b[(x + 1) % 5][y]) & b[(x + 2) % 5][y]) & _MASK for y in range(5)]
            for x in range(5)
        ]
        # iota
        st[0][0] ^= rc
    return st


def keccak256_py(data: bytes) -> Hash256:
    """Pure-Python Keccak-256.  Slow; kept as the reference/fallback path."""
    msg = _pad(data)
    st = [[0] * 5 for _ in range(5)]
    for off in range(0, len(msg), _RATE):
        for i in range(_RATE // 8):
            st[i % 5][i // 5] ^= int.from_bytes(msg[off + i * 8 : off + i * 8 + 8], "little")
        st = _keccak_f_py(st)
    out = bytearray()
    for y in range(5):
        for x in range(5):
            out += st[x][y].to_bytes(8, "little")
            if len(out) >= 32:
                return bytes(out[:32])
    raise AssertionError("unreachable")


def _build_fast():
    import numpy as np
    from numba import njit, uint64

    rc = np.array(_ROUND_CONSTANTS, dtype=np.uint64)
    # flattened lane index: x + 5*y
    rot = np.zeros(25, dtype=np.uint64)
    for x in range(5):
        for y in range(5):
            rot[x + 5 * y] = _ROTATIONS[x][y]

    @njit(cache=True)
    def _sponge(msg, rc, rot):  # pragma: no cover - compiled
        state = np.zeros(25, dtype=np.uint64)
        tmp = np.empty(25, dtype=np.uint64)
        c = np.empty(5, dtype=np.uint64)
        nblocks = msg.shape[0] // 136
        for blk in range(nblocks):
            base = blk * 136
            for i in range(17):
                lane = uint64(0)
                for j in range(8):
                    lane |= uint64(msg[base + i * 8 + j]) << uint64(8 * j)
                state[i] ^= lane
            for r in range(24):
                for x in range(5):
                    c[x] = state[x] ^ state[x + 5] ^ state[x + 10] ^ state[x + 15] ^ state[x + 20]
                for x in range(5):
                    t = c[(x + 4) % 5] ^ ((c[(x + 1) % 5] << uint64(1)) | (c[(x + 1) % 5] >> uint64(63)))
                    for y in range(5):
                        state[x + 5 * y] ^= t
                for x in range(5):
                    for y in range(5):
                        v = state[x + 5 * y]
                        n = rot[x + 5 * y]
                        if n:
                            v = (v << n) | (v >> (uint64(64) - n))
                        tmp[y + 5 * ((2 * x + 3 * y) % 5)] = v
                for y in range(5):
                    for x in range(5):
                        state[x + 5 * y] = tmp[x + 5 * y] ^ ((~tmp[(x + 1) % 5 + 5 * y]) & tmp[(x + 2) % 5 + 5 * y])
                state[0] ^= rc[r]
        out = np.empty(32, dtype=np.uint8)
        for i in range(4):
            for j in range(8):
                out[i * 8 + j] = uint64(state[i] >> uint64(8 * j)) & uint64(0xFF)
        return out

    def keccak256_fast(data: bytes) -> Hash256:
        msg = np.frombuffer(bytes(_pad(data)), dtype=np.uint8)
        return _sponge(msg, rc, rot).tobytes()

    return keccak256_fast


try:
    _fast = _build_fast()
except ImportError:  # pragma: no cover - numba/numpy always present in CI
    _fast = None


def keccak256(data: bytes) -> Hash256:
    """Keccak-256 digest of ``data``.  Pure function, empty input allowed."""
    if _fast is not None:
        return _fast(data)
    return keccak256_py(data)


def is_hash256(value: object) -> bool:
    return isinstance(value, (bytes, bytearray)) and len(value) == 32
