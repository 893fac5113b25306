"""Cryptographic core: Keccak-256, Merkle trees, block construction and
full-chain validation."""

from evault.hashchain.keccak import Hash256, ZERO_HASH, keccak256
from evault.hashchain.merkle import (
    EmptyLeafSet,
    IndexOutOfRange,
    MerkleProof,
    merkle_prove,
    merkle_root,
    merkle_verify,
)

_BLOCK_NAMES = (
    "GENESIS",
    "GENESIS_HASH",
    "Block",
    "BlockHeader",
    "BlockValidationError",
    "ChainError",
    "block_hash",
    "build_block",
    "decode_block",
    "leading_zero_bits",
    "validate_block",
    "verify_chain",
)

__all__ = [
    "Hash256",
    "ZERO_HASH",
    "keccak256",
    "EmptyLeafSet",
    "IndexOutOfRange",
    "MerkleProof",
    "merkle_prove",
    "merkle_root",
    "merkle_verify",
    *_BLOCK_NAMES,
]


def __getattr__(name):
    # Deferred: block.py holds Transaction containers, whose module imports
    # identity (and so this package) back; loading it lazily keeps
    # `evault.hashchain.keccak` importable from anywhere.
    if name in _BLOCK_NAMES:
        from evault.hashchain import block as _block

        return getattr(_block, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
