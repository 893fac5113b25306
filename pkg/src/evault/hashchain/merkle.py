"""Merkle tree over transaction hashes: root, membership proof, verification.

Conventions (consensus-critical, shared by every node):
  - parent = keccak256(left || right)
  - an odd node count at any level duplicates the last node
  - a single-leaf tree's root is the leaf itself
"""

from __future__ import annotations

from dataclasses import dataclass

from evault.hashchain.keccak import Hash256, keccak256

LEFT = 0
RIGHT = 1


class EmptyLeafSet(ValueError):
    """merkle_root / merkle_prove require at least one leaf."""


class IndexOutOfRange(IndexError):
    pass


@dataclass(frozen=True)
class MerkleProof:
    """Sibling path for one leaf, bottom-up.

    Each entry is (sibling_hash, side) where side says on which side the
    sibling sits when recomputing the parent: RIGHT means parent =
    H(node || sibling), LEFT means parent = H(sibling || node).
    """

    leaf_index: int
    siblings: tuple[tuple[Hash256, int], ...]


def merkle_root(leaves: list[Hash256]) -> Hash256:
    if not leaves:
        raise EmptyLeafSet("merkle_root of zero leaves")
    level = list(leaves)
    while len(level) > 1:
        if len(level) % 2:
            level.append(level[-1])
        level = [keccak256(level[i] + level[i + 1]) for i in range(0, len(level), 2)]
    return level[0]


def merkle_prove(leaves: list[Hash256], index: int) -> MerkleProof:
    if not leaves:
        raise EmptyLeafSet("merkle_prove of zero leaves")
    if not 0 <= index < len(leaves):
        raise IndexOutOfRange(f"leaf index {index} out of range for {len(leaves)} leaves")
    siblings: list[tuple[Hash256, int]] = []
    level = list(leaves)
    pos = index
    while len(level) > 1:
        if len(level) % 2:
            level.append(level[-1])
        sibling_pos = pos ^ 1
        side = RIGHT if sibling_pos > pos else LEFT
        siblings.append((level[sibling_pos], side))
        level = [keccak256(level[i] + level[i + 1]) for i in range(0, len(level), 2)]
        pos //= 2
    return MerkleProof(leaf_index=index, siblings=tuple(siblings))


def merkle_verify(leaf: Hash256, proof: MerkleProof, root: Hash256) -> bool:
    """True iff folding ``leaf`` through the proof reproduces ``root``.

    Never raises: a malformed proof simply fails to reproduce the root.
    """
    node = leaf
    try:
        for sibling, side in proof.siblings:
            if side == RIGHT:
                node = keccak256(node + sibling)
            elif side == LEFT:
                node = keccak256(sibling + node)
            else:
                return False
    except TypeError:
        return False
    return node == root
