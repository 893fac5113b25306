"""Blocks: hash-chained, Merkle-rooted, timestamped transaction containers.

The genesis block is a compile-time constant shared by every node: height 0,
zero parent hash, timestamp 0, no transactions, the all-zero proposer and an
empty signature.  Every other block commits to its parent's header hash, to
the Merkle root of its transaction hashes, and is signed by its proposer
over the header hash.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from evault import identity as ident
from evault.contracts.transactions import Transaction, read_transaction, tx_hash
from evault.encoding import ByteReader, ByteWriter
from evault.hashchain.keccak import Hash256, ZERO_HASH, keccak256
from evault.hashchain.merkle import merkle_root
from evault.identity import UID


class ChainError(ValueError):
    """Build-time chain violations (EmptyTransactionList, ClockRegression,
    NotGenesis)."""

    def __init__(self, code: str, message: str) -> None:
        super().__init__(f"{code}: {message}")
        self.code = code


class BlockValidationError(ValueError):
    """A block failed validation; ``code`` names the first failed check."""

    def __init__(self, code: str, message: str) -> None:
        super().__init__(f"{code}: {message}")
        self.code = code


@dataclass(frozen=True)
class BlockHeader:
    height: int
    parent_hash: Hash256
    merkle_root: Hash256
    timestamp: int  # ms since Unix epoch, non-decreasing along the chain
    proposer: UID
    nonce: int = 0  # only meaningful under the toy work check

    def encode(self) -> bytes:
        w = ByteWriter()
        w.u64(self.height)
        w.raw(self.parent_hash)
        w.raw(self.merkle_root)
        w.u64(self.timestamp)
        w.raw(self.proposer)
        w.u64(self.nonce)
        return w.getvalue()


@dataclass(frozen=True)
class Block:
    header: BlockHeader
    transactions: tuple[Transaction, ...]
    signature: bytes  # proposer's signature over the header hash

    def encode(self) -> bytes:
        w = ByteWriter()
        w.raw(self.header.encode())
        w.count(len(self.transactions))
        for tx in self.transactions:
            w.bytes(tx.encode())
        w.bytes(self.signature)
        return w.getvalue()


def block_hash(header: BlockHeader) -> Hash256:
    return keccak256(header.encode())


GENESIS = Block(
    header=BlockHeader(
        height=0,
        parent_hash=ZERO_HASH,
        merkle_root=ZERO_HASH,
        timestamp=0,
        proposer=bytes(32),
        nonce=0,
    ),
    transactions=(),
    signature=b"",
)

GENESIS_HASH = block_hash(GENESIS.header)


def decode_block(data: bytes) -> Block:
    r = ByteReader(data)
    height = r.u64()
    parent_hash = r.raw(32)
    root = r.raw(32)
    timestamp = r.u64()
    proposer = r.raw(32)
    nonce = r.u64()
    header = BlockHeader(height, parent_hash, root, timestamp, proposer, nonce)
    txs = []
    for _ in range(r.count()):
        tx_bytes = r.bytes()
        tx_reader = ByteReader(tx_bytes)
        tx = read_transaction(tx_reader)
        tx_reader.expect_end()
        txs.append(tx)
    signature = r.bytes()
    r.expect_end()
    return Block(header, tuple(txs), signature)


def leading_zero_bits(digest: Hash256) -> int:
    bits = 0
    for byte in digest:
        if byte == 0:
            bits += 8
            continue
        for shift in range(7, -1, -1):
            if byte >> shift:
                return bits + (7 - shift)
        return bits
    return bits


def build_block(
    parent: BlockHeader,
    txs: list[Transaction],
    proposer: UID,
    timestamp: int,
    signing_key: bytes,
    work_bits: int = 0,
) -> Block:
    """Assemble, (toy-)mine and sign a child of ``parent``.

    With work_bits > 0 the nonce is ground upward until the header hash has
    at least that many leading zero bits; work_bits stays small (<= 12 or
    so), this check demonstrates the concept, it is not the consensus.
    """
    if not txs:
        raise ChainError("EmptyTransactionList", "only genesis may be empty")
    if timestamp < parent.timestamp:
        raise ChainError(
            "ClockRegression",
            f"timestamp {timestamp} precedes parent timestamp {parent.timestamp}",
        )
    root = merkle_root([tx_hash(tx) for tx in txs])
    nonce = 0
    while True:
        header = BlockHeader(
            height=parent.height + 1,
            parent_hash=block_hash(parent),
            merkle_root=root,
            timestamp=timestamp,
            proposer=proposer,
            nonce=nonce,
        )
        if work_bits <= 0 or leading_zero_bits(block_hash(header)) >= work_bits:
            break
        nonce += 1
    signature = ident.sign(signing_key, block_hash(header))
    return Block(header, tuple(txs), signature)


def validate_block(
    block: Block,
    parent: BlockHeader,
    expected_proposer: UID,
    proposer_key: bytes,
    work_bits: int = 0,
) -> None:
    """Check a block against the tip it claims to extend.

    Raises BlockValidationError whose code names the first failed check:
    BadParent, BadHeight, BadMerkleRoot, BadTimestamp, WrongProposer,
    BadSignature, InsufficientWork.
    """
    header = block.header
    if header.parent_hash != block_hash(parent):
        raise BlockValidationError("BadParent", "parent hash does not match tip")
    if header.height != parent.height + 1:
        raise BlockValidationError(
            "BadHeight", f"expected height {parent.height + 1}, got {header.height}"
        )
    if not block.transactions:
        raise BlockValidationError("BadMerkleRoot", "non-genesis block with no transactions")
    recomputed = merkle_root([tx_hash(tx) for tx in block.transactions])
    if header.merkle_root != recomputed:
        raise BlockValidationError("BadMerkleRoot", "merkle root does not match transactions")
    if header.timestamp < parent.timestamp:
        raise BlockValidationError(
            "BadTimestamp",
            f"timestamp {header.timestamp} precedes parent {parent.timestamp}",
        )
    if header.proposer != expected_proposer:
        raise BlockValidationError(
            "WrongProposer",
            f"expected {expected_proposer.hex()}, got {header.proposer.hex()}",
        )
    if not ident.verify(proposer_key, block_hash(header), block.signature):
        raise BlockValidationError("BadSignature", "proposer signature does not verify")
    if work_bits > 0 and leading_zero_bits(block_hash(header)) < work_bits:
        raise BlockValidationError(
            "InsufficientWork", f"block hash has fewer than {work_bits} leading zero bits"
        )


ProposerResolver = Callable[[int], tuple[UID, bytes]]
"""Maps a height to (expected proposer uid, proposer verification key)."""


def verify_chain(
    blocks: list[Block],
    proposer_for: ProposerResolver,
    work_bits: int = 0,
) -> Optional[int]:
    """Validate a whole chain starting at the genesis constant.

    Returns None if every adjacent pair validates, else the height of the
    first invalid block.  Raises ChainError("NotGenesis") when blocks[0] is
    not the genesis constant.
    """
    if not blocks or blocks[0].encode() != GENESIS.encode():
        raise ChainError("NotGenesis", "chain must start at the genesis constant")
    parent = GENESIS.header
    for block in blocks[1:]:
        expected_uid, key = proposer_for(parent.height + 1)
        try:
            validate_block(block, parent, expected_uid, key, work_bits)
        except BlockValidationError:
            return parent.height + 1
        parent = block.header
    return None
