"""Hash core: published reference vectors, determinism, fast/reference
implementation agreement, avalanche smoke check."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evault.hashchain import keccak256
from evault.hashchain.keccak import keccak256_py

# Published Keccak-256 reference vectors (original 0x01 padding, the variant
# the Ethereum platform uses; NIST SHA3-256 gives different digests).
REFERENCE_VECTORS = [
    (b"", "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470"),
    (b"abc", "4e03657aea45a94fc7d47ba826c8d667c0d1e6e33a64a036ec44f58fa12d6c45"),
    (
        b"The quick brown fox jumps over the lazy dog",
        "4d741b6f1eb29cb2a9b9911c82f56fa8d73b04959d3d9d222895df6c0b28aa15",
    ),
]


@pytest.mark.parametrize("data,expected", REFERENCE_VECTORS)
def test_reference_vectors(data, expected):
    assert keccak256(data).hex() == expected


@pytest.mark.parametrize("data,expected", REFERENCE_VECTORS)
def test_reference_vectors_pure_python(data, expected):
    assert keccak256_py(data).hex() == expected


def test_not_nist_sha3():
    import hashlib

    assert keccak256(b"") != hashlib.sha3_256(b"").digest()


def test_deterministic():
    data = b"some legal document bytes"
    assert keccak256(data) == keccak256(data)
    assert len(keccak256(data)) == 32


@settings(max_examples=200, deadline=None)
@given(st.binary(min_size=0, max_size=600))
def test_fast_agrees_with_reference_implementation(data):
    assert keccak256(data) == keccak256_py(data)


def test_multi_block_inputs():
    # exercise inputs straddling the 136-byte rate boundary
    for n in (135, 136, 137, 271, 272, 273, 1000):
        data = bytes(range(256)) * 4
        assert keccak256(data[:n]) == keccak256_py(data[:n])


def test_avalanche_smoke():
    """Flipping one random bit always changes the digest (1,000 trials)."""
    rng = random.Random(1234)
    for _ in range(1000):
        data = bytearray(rng.randbytes(rng.randint(1, 200)))
        original = keccak256(bytes(data))
        pos = rng.randrange(len(data))
        data[pos] ^= 1 << rng.randrange(8)
        assert keccak256(bytes(data)) != original
