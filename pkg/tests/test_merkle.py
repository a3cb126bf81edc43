import hashlib

import pytest
from hypothesis import given, strategies as st

from supernet_lc.crypto import ZERO_HASH
from supernet_lc.merkle import LEFT, RIGHT, MerkleProof, build_proof, merkle_root, verify_proof


def naive_root(nodes):
    """Recursive oracle: pad to even, pair up, recurse."""
    if len(nodes) == 1:
        return nodes[0]
    if len(nodes) % 2:
        nodes = nodes + [nodes[-1]]
    return naive_root([hashlib.sha256(nodes[i] + nodes[i + 1]).digest() for i in range(0, len(nodes), 2)])


def leaves_of(n, tag=b"leaf"):
    return [hashlib.sha256(tag + bytes([i])).digest() for i in range(n)]


def flip_bit(hex_value, bit):
    raw = bytearray(bytes.fromhex(hex_value))
    raw[bit // 8] ^= 1 << (bit % 8)
    return raw.hex()


def test_empty_tree_root_is_zero_hash():
    assert merkle_root([]).hex() == ZERO_HASH


def test_one_leaf_root_is_the_leaf_and_proof_is_empty():
    (leaf,) = leaves_of(1)
    proof = build_proof([leaf], 0)
    assert merkle_root([leaf]) == leaf
    assert proof.path == () and proof.root == leaf.hex()
    assert verify_proof(proof)


def test_two_leaf_root_by_hand():
    a, b = leaves_of(2)
    assert merkle_root([a, b]) == hashlib.sha256(a + b).digest()


def test_odd_level_duplicates_last_node():
    a, b, c = leaves_of(3)
    ab = hashlib.sha256(a + b).digest()
    cc = hashlib.sha256(c + c).digest()
    assert merkle_root([a, b, c]) == hashlib.sha256(ab + cc).digest()


@given(st.integers(min_value=1, max_value=40))
def test_root_matches_naive_oracle(n):
    leaves = leaves_of(n)
    assert merkle_root(leaves) == naive_root(leaves)


@given(st.integers(min_value=1, max_value=33), st.data())
def test_every_honest_proof_verifies(n, data):
    leaves = leaves_of(n)
    index = data.draw(st.integers(min_value=0, max_value=n - 1))
    proof = build_proof(leaves, index)
    assert proof.root == naive_root(leaves).hex()
    assert verify_proof(proof)


def test_proof_against_a_different_root_fails():
    leaves = leaves_of(5)
    proof = build_proof(leaves, 1)
    other = merkle_root(leaves_of(5, b"other")).hex()
    assert verify_proof(proof)
    assert not verify_proof(MerkleProof(proof.leaf_hash, proof.path, other))


def test_single_bit_flip_sweep():
    leaves = leaves_of(5)
    for index in range(5):
        proof = build_proof(leaves, index)
        for bit in range(256):
            assert not verify_proof(MerkleProof(flip_bit(proof.leaf_hash, bit), proof.path, proof.root))
            assert not verify_proof(MerkleProof(proof.leaf_hash, proof.path, flip_bit(proof.root, bit)))
            for k, (sibling, side) in enumerate(proof.path):
                path = list(proof.path)
                path[k] = (flip_bit(sibling, bit), side)
                assert not verify_proof(MerkleProof(proof.leaf_hash, tuple(path), proof.root))


def test_malformed_proofs_are_rejected_not_raised():
    proof = build_proof(leaves_of(4), 2)
    assert not verify_proof(MerkleProof("zz", proof.path, proof.root))
    assert not verify_proof(MerkleProof(proof.leaf_hash[:-2], proof.path, proof.root))
    assert not verify_proof(MerkleProof(proof.leaf_hash, ((proof.path[0][0], "X"),) + proof.path[1:], proof.root))


def test_proof_serialization_round_trip():
    proof = build_proof(leaves_of(6), 4)
    data = proof.to_dict()
    assert set(data) == {"leaf", "path", "root"}
    assert all(side in (LEFT, RIGHT) for _, side in data["path"])
    assert MerkleProof.from_dict(data) == proof


def test_index_out_of_range():
    with pytest.raises(IndexError):
        build_proof(leaves_of(3), 3)
