"""Brute-force Merkle oracle, independent of the implementation under test.

Recomputes tree heads straight from the recursive definition (leaf hash
0x00-prefixed, interior hash 0x01-prefixed, split at the largest power of two
strictly below the leaf count). Used by the unit tests and the acceptance
gate to cross-check every proof the incremental log produces. Kept free of
imports from rawebs so a bug cannot be shared with the code it checks.
"""

import hashlib


def oracle_leaf_hash(leaf: bytes) -> bytes:
    return hashlib.sha256(b"\x00" + leaf).digest()


def oracle_root(leaves: list[bytes]) -> bytes:
    n = len(leaves)
    if n == 0:
        return hashlib.sha256(b"").digest()
    if n == 1:
        return oracle_leaf_hash(leaves[0])
    k = 1
    while k * 2 < n:
        k *= 2
    left = oracle_root(leaves[:k])
    right = oracle_root(leaves[k:])
    return hashlib.sha256(b"\x01" + left + right).digest()
