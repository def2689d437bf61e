"""Append-only certificate log with a bounded merge delay, plus the monitor.

The log accepts a precertificate immediately (returning a signed receipt)
but the entry only becomes visible in tree heads, proofs, and monitor
queries once its publication time arrives. Publication times are clamped
monotone across entries so the published set is always a strict prefix of
the append sequence; without that, a random short delay landing behind a
long one would publish entries out of index order and break head-to-head
consistency. The clamp keeps every entry within its own merge-delay bound.
"""

from __future__ import annotations

import bisect
import random
import threading
from dataclasses import dataclass, replace
from typing import Optional, Union

from . import merkle
from .model import Clock, KeyPair, length_prefixed, u64be, verify_signature
from .pki import Precertificate, Sct

DEFAULT_MMD_SECONDS = 86_400
STH_MAGIC = b"RAWEBS-STH1"


class FixedDelay:
    """Every entry waits the same time; defaults to the full merge window."""

    def __init__(self, seconds: Optional[int] = None):
        self.seconds = seconds

    def draw(self, rng: random.Random, mmd: int) -> int:
        return mmd if self.seconds is None else min(self.seconds, mmd)


class UniformDelay:
    def draw(self, rng: random.Random, mmd: int) -> int:
        return rng.randint(0, mmd)


class ZeroDelay:
    def draw(self, rng: random.Random, mmd: int) -> int:
        return 0


DelayPolicy = Union[FixedDelay, UniformDelay, ZeroDelay]


@dataclass(frozen=True)
class LogEntry:
    index: int
    precert: Precertificate
    submit_time: int
    publish_time: int

    def leaf_bytes(self) -> bytes:
        return self.precert.encode()


@dataclass(frozen=True)
class SignedTreeHead:
    tree_size: int
    root_hash: bytes
    timestamp: int
    signature: bytes

    def signed_payload(self) -> bytes:
        return STH_MAGIC + u64be(self.tree_size) + self.root_hash + u64be(self.timestamp)


def verify_sth(sth: SignedTreeHead, log_public_der: bytes) -> bool:
    return verify_signature(log_public_der, sth.signed_payload(), sth.signature)


class CtLog:
    def __init__(
        self,
        log_id: str = "rawebs-log",
        keypair: Optional[KeyPair] = None,
        mmd: int = DEFAULT_MMD_SECONDS,
        delay: Optional[object] = None,
        seed: int = 0,
    ):
        self.log_id = log_id
        self.keypair = keypair or KeyPair.generate()
        self.mmd = mmd
        self.delay = delay if delay is not None else FixedDelay()
        self._rng = random.Random(seed)
        self._entries: list[LogEntry] = []
        self._publish_times: list[int] = []  # mirrors entries; monotone
        self._lock = threading.Lock()

    @property
    def public_der(self) -> bytes:
        return self.keypair.public_der

    def append(self, precert: Precertificate, clock: Clock) -> Sct:
        """Accept an entry and return the signed receipt; publication
        happens up to mmd seconds later."""
        with self._lock:
            submit = clock.now()
            delay = self.delay.draw(self._rng, self.mmd)
            if not 0 <= delay <= self.mmd:
                raise ValueError(f"delay policy produced {delay} outside 0..{self.mmd}")
            publish = submit + delay
            if self._publish_times:
                publish = max(publish, self._publish_times[-1])
            entry = LogEntry(
                index=len(self._entries),
                precert=precert,
                submit_time=submit,
                publish_time=publish,
            )
            self._entries.append(entry)
            self._publish_times.append(publish)

            sct = Sct(
                log_id=self.log_id,
                timestamp=submit,
                entry_hash=precert.entry_hash(),
                signature=b"",
            )
            return replace(sct, signature=self.keypair.sign(sct.signed_payload()))

    def published_count(self, now: int) -> int:
        with self._lock:
            return bisect.bisect_right(self._publish_times, now)

    def entries(self, now: int) -> list[LogEntry]:
        """Published entries, oldest first."""
        with self._lock:
            count = bisect.bisect_right(self._publish_times, now)
            return list(self._entries[:count])

    def all_entries(self) -> list[LogEntry]:
        """Every accepted entry including unpublished ones; the log's own
        private view, not something a monitor can see."""
        with self._lock:
            return list(self._entries)

    def _published_leaves(self, now: int) -> list[bytes]:
        count = bisect.bisect_right(self._publish_times, now)
        return [entry.leaf_bytes() for entry in self._entries[:count]]

    def sth(self, clock: Clock) -> SignedTreeHead:
        with self._lock:
            now = clock.now()
            leaves = self._published_leaves(now)
            head = SignedTreeHead(
                tree_size=len(leaves),
                root_hash=merkle.root_hash(leaves),
                timestamp=now,
                signature=b"",
            )
            return replace(head, signature=self.keypair.sign(head.signed_payload()))

    def inclusion_proof(self, index: int, tree_size: int, clock: Clock) -> list[bytes]:
        with self._lock:
            leaves = self._published_leaves(clock.now())
            if tree_size > len(leaves):
                raise merkle.OutOfRange(
                    f"tree size {tree_size} exceeds published count {len(leaves)}"
                )
            if not 0 <= index < tree_size:
                raise merkle.OutOfRange(f"index {index} outside tree of size {tree_size}")
            return merkle.inclusion_proof(leaves[:tree_size], index)

    def consistency_proof(self, old_size: int, new_size: int, clock: Clock) -> list[bytes]:
        with self._lock:
            leaves = self._published_leaves(clock.now())
            if new_size > len(leaves):
                raise merkle.OutOfRange(
                    f"tree size {new_size} exceeds published count {len(leaves)}"
                )
            return merkle.consistency_proof(leaves, old_size, new_size)


@dataclass
class CtMonitor:
    """Read-side view of a log. The monitor sees an entry only after the
    log has published it and the monitor's own ingestion lag has passed."""

    log: CtLog
    lag: int = 0

    def _horizon(self, clock: Clock) -> int:
        return clock.now() - self.lag

    def query(self, domain: str, clock: Clock) -> list[LogEntry]:
        """Visible entries whose precertificate names the domain."""
        return [e for e in self.log.entries(self._horizon(clock)) if e.precert.domain == domain]

    def entries_since(self, start_index: int, clock: Clock) -> list[LogEntry]:
        """Visible entries with index >= start_index, for cursor-driven
        consumers."""
        return [e for e in self.log.entries(self._horizon(clock)) if e.index >= start_index]

    def visible_count(self, clock: Clock) -> int:
        return self.log.published_count(self._horizon(clock))
