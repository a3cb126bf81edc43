"""Binary Merkle trees over 32-byte leaf hashes.

Internal nodes hash the raw concatenation ``left || right``. A level with an
odd number of nodes duplicates its last node. A one-leaf tree's root is the
leaf itself and the empty tree's root is the zero hash.
"""

from __future__ import annotations

from dataclasses import dataclass

from .crypto import ZERO_HASH, hash_bytes

LEFT = "L"
RIGHT = "R"


def _parent(left: bytes, right: bytes) -> bytes:
    return hash_bytes(left + right)


def merkle_root(leaves: list[bytes]) -> bytes:
    if not leaves:
        return bytes.fromhex(ZERO_HASH)
    level = list(leaves)
    while len(level) > 1:
        if len(level) % 2:
            level.append(level[-1])
        level = [_parent(level[i], level[i + 1]) for i in range(0, len(level), 2)]
    return level[0]


def merkle_path(leaves: list[bytes], index: int) -> list[tuple[bytes, str]]:
    """Sibling path for ``leaves[index]``; side is where the sibling sits."""
    if not 0 <= index < len(leaves):
        raise IndexError(f"leaf index {index} out of range for {len(leaves)} leaves")
    path = []
    level = list(leaves)
    while len(level) > 1:
        if len(level) % 2:
            level.append(level[-1])
        if index % 2:
            path.append((level[index - 1], LEFT))
        else:
            path.append((level[index + 1], RIGHT))
        level = [_parent(level[i], level[i + 1]) for i in range(0, len(level), 2)]
        index //= 2
    return path


def fold_path(leaf: bytes, path: list[tuple[bytes, str]]) -> bytes:
    node = leaf
    for sibling, side in path:
        if side == LEFT:
            node = _parent(sibling, node)
        elif side == RIGHT:
            node = _parent(node, sibling)
        else:
            raise ValueError(f"bad side flag {side!r}")
    return node


@dataclass(frozen=True)
class MerkleProof:
    leaf_hash: str
    path: tuple[tuple[str, str], ...]
    root: str

    def to_dict(self) -> dict:
        return {
            "leaf": self.leaf_hash,
            "path": [[h, side] for h, side in self.path],
            "root": self.root,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MerkleProof":
        return cls(data["leaf"], tuple((h, side) for h, side in data["path"]), data["root"])


def build_proof(leaves: list[bytes], index: int) -> MerkleProof:
    path = merkle_path(leaves, index)
    return MerkleProof(
        leaf_hash=leaves[index].hex(),
        path=tuple((h.hex(), side) for h, side in path),
        root=merkle_root(leaves).hex(),
    )


def verify_proof(proof: MerkleProof) -> bool:
    """Self-contained check: does the leaf fold up the path to the root?"""
    try:
        leaf = bytes.fromhex(proof.leaf_hash)
        path = [(bytes.fromhex(h), side) for h, side in proof.path]
        root = bytes.fromhex(proof.root)
        if len(leaf) != 32 or len(root) != 32 or any(len(h) != 32 for h, _ in path):
            return False
        return fold_path(leaf, path) == root
    except ValueError:
        return False
