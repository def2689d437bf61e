"""Merkle tree hashing used by the certificate log.

Leaf and interior hashes are domain-separated (0x00 / 0x01 prefixes) so a
leaf can never be replayed as an interior node. The empty tree hashes to
sha256 of the empty string. Proof generation recomputes over the stored
leaves; at desk scale (thousands of entries) that beats carrying an
incremental node store, and the verifiers are the part that has to be right.
"""

from __future__ import annotations

import hashlib
from typing import Sequence

from .model import ProtocolError


class OutOfRange(ProtocolError):
    pass


def leaf_hash(leaf: bytes) -> bytes:
    return hashlib.sha256(b"\x00" + leaf).digest()


def node_hash(left: bytes, right: bytes) -> bytes:
    return hashlib.sha256(b"\x01" + left + right).digest()


EMPTY_ROOT = hashlib.sha256(b"").digest()


def _split_point(n: int) -> int:
    """Largest power of two strictly less than n."""
    k = 1
    while k * 2 < n:
        k *= 2
    return k


def root_hash(leaves: Sequence[bytes]) -> bytes:
    n = len(leaves)
    if n == 0:
        return EMPTY_ROOT
    if n == 1:
        return leaf_hash(leaves[0])
    k = _split_point(n)
    return node_hash(root_hash(leaves[:k]), root_hash(leaves[k:]))


def inclusion_proof(leaves: Sequence[bytes], index: int) -> list[bytes]:
    """Audit path for the leaf at index within the given tree."""
    n = len(leaves)
    if not 0 <= index < n:
        raise OutOfRange(f"leaf index {index} outside tree of size {n}")
    if n == 1:
        return []
    k = _split_point(n)
    if index < k:
        return inclusion_proof(leaves[:k], index) + [root_hash(leaves[k:])]
    return inclusion_proof(leaves[k:], index - k) + [root_hash(leaves[:k])]


def verify_inclusion(leaf: bytes, index: int, size: int, proof: Sequence[bytes], root: bytes) -> bool:
    """Fold the audit path and compare against the claimed root."""
    if index < 0 or size <= 0 or index >= size:
        return False
    fn, sn = index, size - 1
    acc = leaf_hash(leaf)
    for node in proof:
        if sn == 0:
            return False
        if fn % 2 == 1 or fn == sn:
            acc = node_hash(node, acc)
            if fn % 2 == 0:
                while fn % 2 == 0 and fn != 0:
                    fn >>= 1
                    sn >>= 1
        else:
            acc = node_hash(acc, node)
        fn >>= 1
        sn >>= 1
    return sn == 0 and acc == root


def consistency_proof(leaves: Sequence[bytes], old_size: int, new_size: int) -> list[bytes]:
    """Proof that the tree over leaves[:old_size] is a prefix of the tree
    over leaves[:new_size]."""
    if not 0 <= old_size <= new_size <= len(leaves):
        raise OutOfRange(f"sizes {old_size}..{new_size} outside tree of {len(leaves)} leaves")
    if old_size == 0 or old_size == new_size:
        return []
    return _subproof(leaves[:new_size], old_size, True)


def _subproof(leaves: Sequence[bytes], m: int, whole_subtree_known: bool) -> list[bytes]:
    n = len(leaves)
    if m == n:
        return [] if whole_subtree_known else [root_hash(leaves)]
    k = _split_point(n)
    if m <= k:
        return _subproof(leaves[:k], m, whole_subtree_known) + [root_hash(leaves[k:])]
    return _subproof(leaves[k:], m - k, False) + [root_hash(leaves[:k])]


def verify_consistency(
    old_size: int, new_size: int, proof: Sequence[bytes], old_root: bytes, new_root: bytes
) -> bool:
    """Check that the old tree head is consistent with the new one."""
    if old_size < 0 or new_size < old_size:
        return False
    if old_size == new_size:
        return not proof and old_root == new_root
    if old_size == 0:
        return not proof and new_root is not None
    path = list(proof)
    if old_size & (old_size - 1) == 0:
        # old tree is a complete subtree; its root is implied, not sent
        path = [old_root] + path
    if not path:
        return False

    fn, sn = old_size - 1, new_size - 1
    while fn % 2 == 1:
        fn >>= 1
        sn >>= 1
    fr = sr = path[0]
    for node in path[1:]:
        if sn == 0:
            return False
        if fn % 2 == 1 or fn == sn:
            fr = node_hash(node, fr)
            sr = node_hash(node, sr)
            if fn % 2 == 0:
                while fn % 2 == 0 and fn != 0:
                    fn >>= 1
                    sn >>= 1
        else:
            sr = node_hash(sr, node)
        fn >>= 1
        sn >>= 1
    return sn == 0 and fr == old_root and sr == new_root
