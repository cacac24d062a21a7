"""Binary Merkle trees over content hashes, inclusion proofs and anchor records."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import ArgumentError
from .hashing import merkle_node_hash, require_hash

LEFT = "L"
RIGHT = "R"


def _levels(leaves: Sequence[str]) -> list[list[str]]:
    if not leaves:
        raise ArgumentError("cannot build a Merkle tree from zero leaves")
    level = [require_hash(leaf, "leaf") for leaf in leaves]
    levels = [level]
    while len(level) > 1:
        if len(level) % 2:
            level = level + [level[-1]]
        level = [merkle_node_hash(level[i], level[i + 1]) for i in range(0, len(level), 2)]
        levels.append(level)
    return levels


def build_merkle_root(leaves: Sequence[str]) -> str:
    """Root of the binary tree; odd levels duplicate their last node."""
    return _levels(leaves)[-1][0]


def merkle_proof(leaves: Sequence[str], index: int) -> list[tuple[str, str]]:
    """Sibling path for ``leaves[index]`` as ``(side, hash)`` pairs, leaf upward.

    ``side`` tells where the sibling sits: ``"L"`` means it is hashed on the left.
    """
    if not 0 <= index < len(leaves):
        raise ArgumentError(f"leaf index {index} out of range for {len(leaves)} leaves")
    proof = []
    for level in _levels(leaves)[:-1]:
        sibling = index ^ 1
        if sibling >= len(level):
            sibling = index  # duplicated last node
        side = LEFT if sibling < index else RIGHT
        proof.append((side, level[sibling]))
        index //= 2
    return proof


def verify_inclusion(leaf: str, proof: Sequence[tuple[str, str]], root: str) -> bool:
    node = leaf
    try:
        for side, sibling in proof:
            if side == LEFT:
                node = merkle_node_hash(sibling, node)
            elif side == RIGHT:
                node = merkle_node_hash(node, sibling)
            else:
                return False
    except (ValueError, TypeError):
        return False
    return node == root


@dataclass(frozen=True)
class AnchorRecord:
    merkle_root: str
    seq_from: int
    seq_to: int
    anchored_at: int

    def to_dict(self) -> dict:
        return {
            "anchored_at": self.anchored_at,
            "merkle_root": self.merkle_root,
            "seq_from": self.seq_from,
            "seq_to": self.seq_to,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnchorRecord":
        return cls(d["merkle_root"], int(d["seq_from"]), int(d["seq_to"]), int(d["anchored_at"]))
