"""Versioned trade documents with hash-chained amendments and Merkle history roots.

Document privacy uses salted-hash commitments: the chain holds
``sha256(salt || content)`` and the plaintext only travels to the named
counterparty together with its salt.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import merkle
from .crypto import ZERO_HASH, encode_fields, hash_bytes, hash_hex
from .errors import BrokenChain, UnknownDocument, VersionOutOfRange

SALT_SIZE = 32


@dataclass(frozen=True)
class DocumentVersion:
    doc_id: str
    version: int
    content_hash: str
    parent_hash: str
    author: str
    tick: int

    def encode(self) -> bytes:
        return encode_fields(
            self.doc_id,
            self.version,
            bytes.fromhex(self.content_hash),
            bytes.fromhex(self.parent_hash),
            self.author,
            self.tick,
        )

    def record_hash(self) -> bytes:
        return hash_bytes(self.encode())

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "version": self.version,
            "content_hash": self.content_hash,
            "parent_hash": self.parent_hash,
            "author": self.author,
            "tick": self.tick,
        }


@dataclass(frozen=True)
class Commitment:
    digest: str
    salt: bytes

    def public(self) -> str:
        return self.digest


def commit(content: bytes, rng: random.Random) -> Commitment:
    salt = rng.randbytes(SALT_SIZE)
    return Commitment(digest=hash_hex(salt + content), salt=salt)


def verify_reveal(commitment: Commitment | str, salt: bytes, content: bytes) -> bool:
    digest = commitment.digest if isinstance(commitment, Commitment) else commitment
    return hash_hex(salt + content) == digest


def verify_chain(versions: list[DocumentVersion]) -> int | None:
    """Return the first version number whose link is broken, or None."""
    expected_parent = ZERO_HASH
    for i, record in enumerate(versions):
        if record.version != i + 1 or record.parent_hash != expected_parent:
            return i + 1
        expected_parent = record.record_hash().hex()
    return None


@dataclass
class DocStore:
    histories: dict[str, list[DocumentVersion]] = field(default_factory=dict)
    doc_roots: dict[str, str] = field(default_factory=dict)

    def add_version(self, doc_id: str, content: bytes, author: str, tick: int) -> DocumentVersion:
        versions = self.histories.get(doc_id, [])
        broken = verify_chain(versions)
        if broken is not None:
            raise BrokenChain(f"{doc_id}: link broken at version {broken}")
        parent = versions[-1].record_hash().hex() if versions else ZERO_HASH
        record = DocumentVersion(doc_id, len(versions) + 1, hash_hex(content), parent, author, tick)
        self.histories[doc_id] = versions + [record]
        self.doc_roots[doc_id] = self.history_root(doc_id)
        return record

    def versions(self, doc_id: str) -> list[DocumentVersion]:
        try:
            return self.histories[doc_id]
        except KeyError:
            raise UnknownDocument(doc_id) from None

    def leaves(self, doc_id: str) -> list[bytes]:
        return [v.record_hash() for v in self.versions(doc_id)]

    def history_root(self, doc_id: str) -> str:
        return merkle.merkle_root(self.leaves(doc_id)).hex()

    def prove_inclusion(self, doc_id: str, version: int) -> merkle.MerkleProof:
        leaves = self.leaves(doc_id)
        if not 1 <= version <= len(leaves):
            raise VersionOutOfRange(f"{doc_id} has {len(leaves)} versions, asked for {version}")
        return merkle.build_proof(leaves, version - 1)

    def audit(self) -> list[str]:
        """Problems found re-deriving every chain, root and inclusion proof."""
        problems = []
        for doc_id, versions in sorted(self.histories.items()):
            broken = verify_chain(versions)
            if broken is not None:
                problems.append(f"{doc_id}: broken chain at version {broken}")
            root = self.history_root(doc_id)
            if self.doc_roots.get(doc_id) != root:
                problems.append(f"{doc_id}: stored root does not match history")
            for v in range(1, len(versions) + 1):
                proof = self.prove_inclusion(doc_id, v)
                if proof.root != self.doc_roots.get(doc_id) or not merkle.verify_proof(proof):
                    problems.append(f"{doc_id}: inclusion proof for version {v} fails")
        return problems


verify_proof = merkle.verify_proof
