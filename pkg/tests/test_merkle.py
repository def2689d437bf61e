"""Merkle tree tests against the brute-force oracle.

Exhaustive over sizes 1..64: every inclusion proof for every (index, size)
pair and every consistency proof for every size pair must verify against
roots the oracle reconstructs from scratch.
"""

import hashlib
import random

import pytest

from oracle_merkle import oracle_leaf_hash, oracle_root
from rawebs.merkle import (
    EMPTY_ROOT,
    OutOfRange,
    consistency_proof,
    inclusion_proof,
    leaf_hash,
    node_hash,
    root_hash,
    verify_consistency,
    verify_inclusion,
)

MAX_EXHAUSTIVE = 64


@pytest.fixture(scope="module")
def leaves():
    rng = random.Random(6962)
    return [rng.randbytes(rng.randrange(0, 40)) for _ in range(MAX_EXHAUSTIVE)]


def test_empty_root_is_sha256_of_nothing():
    assert EMPTY_ROOT == hashlib.sha256(b"").digest()
    assert EMPTY_ROOT.hex() == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
    assert root_hash([]) == EMPTY_ROOT


def test_single_leaf_root_hand_rolled():
    leaf = b"L"
    assert root_hash([leaf]) == hashlib.sha256(b"\x00" + leaf).digest()


def test_two_leaf_root_hand_rolled():
    a, b = b"a", b"b"
    expected = hashlib.sha256(
        b"\x01" + hashlib.sha256(b"\x00a").digest() + hashlib.sha256(b"\x00b").digest()
    ).digest()
    assert root_hash([a, b]) == expected


def test_hash_domain_separation():
    assert leaf_hash(b"x") != hashlib.sha256(b"x").digest()
    assert node_hash(b"l", b"r") != hashlib.sha256(b"lr").digest()


def test_roots_match_oracle_for_all_sizes(leaves):
    for size in range(MAX_EXHAUSTIVE + 1):
        assert root_hash(leaves[:size]) == oracle_root(leaves[:size]), f"size {size}"


def test_every_inclusion_proof_verifies_against_oracle_root(leaves):
    for size in range(1, MAX_EXHAUSTIVE + 1):
        root = oracle_root(leaves[:size])
        for index in range(size):
            proof = inclusion_proof(leaves[:size], index)
            assert verify_inclusion(leaves[index], index, size, proof, root), (
                f"index {index} size {size}"
            )


def test_every_pairwise_consistency_proof_verifies_against_oracle_roots(leaves):
    roots = [oracle_root(leaves[:size]) for size in range(MAX_EXHAUSTIVE + 1)]
    for old in range(MAX_EXHAUSTIVE + 1):
        for new in range(old, MAX_EXHAUSTIVE + 1):
            proof = consistency_proof(leaves[:new], old, new)
            assert verify_consistency(old, new, proof, roots[old], roots[new]), (
                f"old {old} new {new}"
            )


def test_tampered_inclusion_proof_fails(leaves):
    size = 13
    root = oracle_root(leaves[:size])
    proof = inclusion_proof(leaves[:size], 5)
    bad = [bytes([p[0] ^ 1]) + p[1:] for p in proof[:1]] + proof[1:]
    assert not verify_inclusion(leaves[5], 5, size, bad, root)
    assert not verify_inclusion(leaves[6], 5, size, proof, root)
    assert not verify_inclusion(leaves[5], 4, size, proof, root)


def test_forked_tree_fails_consistency(leaves):
    old = 8
    honest = leaves[:12]
    forked = leaves[: old - 1] + [b"swapped"] + leaves[old:12]
    proof = consistency_proof(forked, old, 12)
    assert not verify_consistency(old, 12, proof, oracle_root(leaves[:old]), oracle_root(forked))


def test_out_of_range_infractions(leaves):
    with pytest.raises(OutOfRange):
        inclusion_proof(leaves[:4], 4)
    with pytest.raises(OutOfRange):
        inclusion_proof(leaves[:4], -1)
    with pytest.raises(OutOfRange):
        consistency_proof(leaves[:4], 5, 4)
    with pytest.raises(OutOfRange):
        consistency_proof(leaves[:4], 2, 5)


def test_randomized_medium_trees_match_oracle():
    rng = random.Random(916_2)
    leaves = [rng.randbytes(16) for _ in range(300)]
    checkpoints = sorted(rng.sample(range(1, 301), 12))
    for size in checkpoints:
        assert root_hash(leaves[:size]) == oracle_root(leaves[:size])
    for old, new in zip(checkpoints, checkpoints[1:]):
        proof = consistency_proof(leaves[:new], old, new)
        assert verify_consistency(old, new, proof, oracle_root(leaves[:old]), oracle_root(leaves[:new]))
    size = checkpoints[-1]
    root = oracle_root(leaves[:size])
    for index in rng.sample(range(size), 25):
        proof = inclusion_proof(leaves[:size], index)
        assert verify_inclusion(leaves[index], index, size, proof, root)
