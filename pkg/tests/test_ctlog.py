"""Certificate log tests: merge delay, publication, proofs, monitor view."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from oracle_merkle import oracle_root
from rawebs.ctlog import (
    DEFAULT_MMD_SECONDS,
    CtLog,
    CtMonitor,
    FixedDelay,
    UniformDelay,
    ZeroDelay,
    verify_sth,
)
from rawebs.merkle import EMPTY_ROOT, OutOfRange, verify_consistency, verify_inclusion
from rawebs.model import SimulatedClock
from rawebs.pki import CertificateAuthority


@pytest.fixture()
def ca():
    return CertificateAuthority(name="test-ca")


def make_log(keypair_pool, **kwargs):
    kwargs.setdefault("keypair", keypair_pool[0])
    return CtLog(log_id="test-log", **kwargs)


def issue(ca, keypair_pool, domain="ta.example.com", clock=None):
    return ca.issue_precertificate(domain, keypair_pool[2].public_der, clock or SimulatedClock())


class TestAppendAndPublish:
    def test_default_mmd_is_24_hours(self):
        assert DEFAULT_MMD_SECONDS == 86_400

    def test_sct_timestamp_is_submit_time(self, ca, keypair_pool):
        clock = SimulatedClock(start=500)
        log = make_log(keypair_pool, delay=FixedDelay())
        sct = log.append(issue(ca, keypair_pool, clock=clock), clock)
        assert sct.timestamp == 500
        assert sct.log_id == "test-log"

    def test_fixed_delay_publishes_at_mmd(self, ca, keypair_pool):
        clock = SimulatedClock()
        log = make_log(keypair_pool, delay=FixedDelay())
        log.append(issue(ca, keypair_pool, clock=clock), clock)
        assert log.published_count(clock.now()) == 0
        clock.advance(DEFAULT_MMD_SECONDS - 1)
        assert log.published_count(clock.now()) == 0
        clock.advance(1)
        assert log.published_count(clock.now()) == 1

    def test_zero_delay_publishes_immediately(self, ca, keypair_pool):
        clock = SimulatedClock()
        log = make_log(keypair_pool, delay=ZeroDelay())
        log.append(issue(ca, keypair_pool, clock=clock), clock)
        assert log.published_count(clock.now()) == 1

    def test_indices_dense_in_submission_order(self, ca, keypair_pool):
        clock = SimulatedClock()
        log = make_log(keypair_pool, delay=ZeroDelay())
        for _ in range(5):
            log.append(issue(ca, keypair_pool, clock=clock), clock)
            clock.advance(10)
        assert [e.index for e in log.entries(clock.now())] == [0, 1, 2, 3, 4]

    def test_delay_bound_and_monotone_publication(self, ca, keypair_pool):
        rng = random.Random(11)
        clock = SimulatedClock()
        log = make_log(keypair_pool, delay=UniformDelay(), seed=99)
        for _ in range(60):
            log.append(issue(ca, keypair_pool, clock=clock), clock)
            clock.advance(rng.randrange(0, 3600))
        entries = log.all_entries()
        for entry in entries:
            assert 0 <= entry.publish_time - entry.submit_time <= log.mmd
        publish_times = [e.publish_time for e in entries]
        assert publish_times == sorted(publish_times)


class TestSth:
    def test_empty_log_sth_is_empty_root(self, keypair_pool):
        log = make_log(keypair_pool)
        sth = log.sth(SimulatedClock())
        assert sth.tree_size == 0
        assert sth.root_hash == EMPTY_ROOT
        assert sth.root_hash.hex() == (
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        )

    def test_single_published_leaf_root(self, ca, keypair_pool):
        import hashlib

        clock = SimulatedClock()
        log = make_log(keypair_pool, delay=ZeroDelay())
        precert = issue(ca, keypair_pool, clock=clock)
        log.append(precert, clock)
        sth = log.sth(clock)
        assert sth.tree_size == 1
        assert sth.root_hash == hashlib.sha256(b"\x00" + precert.encode()).digest()

    def test_sth_covers_only_published(self, ca, keypair_pool):
        clock = SimulatedClock()
        log = make_log(keypair_pool, delay=FixedDelay(100))
        log.append(issue(ca, keypair_pool, clock=clock), clock)
        clock.advance(100)
        log.append(issue(ca, keypair_pool, clock=clock), clock)
        sth = log.sth(clock)
        assert sth.tree_size == 1

    def test_sth_signature_verifies(self, ca, keypair_pool):
        clock = SimulatedClock()
        log = make_log(keypair_pool, delay=ZeroDelay())
        log.append(issue(ca, keypair_pool, clock=clock), clock)
        sth = log.sth(clock)
        assert verify_sth(sth, keypair_pool[0].public_der)
        assert not verify_sth(sth, keypair_pool[1].public_der)


class TestProofs:
    def test_inclusion_against_oracle(self, ca, keypair_pool):
        clock = SimulatedClock()
        log = make_log(keypair_pool, delay=ZeroDelay())
        precerts = [issue(ca, keypair_pool, clock=clock) for _ in range(9)]
        for precert in precerts:
            log.append(precert, clock)
        root = oracle_root([p.encode() for p in precerts])
        assert log.sth(clock).root_hash == root
        for index, precert in enumerate(precerts):
            proof = log.inclusion_proof(index, 9, clock)
            assert verify_inclusion(precert.encode(), index, 9, proof, root)

    def test_consistency_between_sths(self, ca, keypair_pool):
        clock = SimulatedClock()
        log = make_log(keypair_pool, delay=ZeroDelay())
        sths = []
        for _ in range(12):
            log.append(issue(ca, keypair_pool, clock=clock), clock)
            sths.append(log.sth(clock))
        for old, new in zip(sths, sths[1:]):
            proof = log.consistency_proof(old.tree_size, new.tree_size, clock)
            assert verify_consistency(
                old.tree_size, new.tree_size, proof, old.root_hash, new.root_hash
            )

    def test_unpublished_entries_unprovable(self, ca, keypair_pool):
        clock = SimulatedClock()
        log = make_log(keypair_pool, delay=FixedDelay(50))
        log.append(issue(ca, keypair_pool, clock=clock), clock)
        with pytest.raises(OutOfRange):
            log.inclusion_proof(0, 1, clock)
        clock.advance(50)
        assert log.inclusion_proof(0, 1, clock) == []

    @settings(max_examples=25, deadline=None)
    @given(
        gaps=st.lists(st.integers(min_value=0, max_value=7200), min_size=1, max_size=25),
        seed=st.integers(0, 2**32),
    )
    def test_append_only_property(self, keypair_pool, gaps, seed):
        """Any interleaving of appends and clock advances yields STHs that
        are pairwise consistent in time order."""
        ca = CertificateAuthority(name="prop-ca")
        clock = SimulatedClock()
        log = make_log(keypair_pool, delay=UniformDelay(), seed=seed)
        sths = [log.sth(clock)]
        for gap in gaps:
            log.append(issue(ca, keypair_pool, clock=clock), clock)
            clock.advance(gap)
            sths.append(log.sth(clock))
        clock.advance(log.mmd)
        sths.append(log.sth(clock))
        for i, old in enumerate(sths):
            for new in sths[i:]:
                proof = log.consistency_proof(old.tree_size, new.tree_size, clock)
                assert verify_consistency(
                    old.tree_size, new.tree_size, proof, old.root_hash, new.root_hash
                )


class TestMonitor:
    def test_domain_filter(self, ca, keypair_pool):
        clock = SimulatedClock()
        log = make_log(keypair_pool, delay=ZeroDelay())
        mine = issue(ca, keypair_pool, domain="mine.example.com", clock=clock)
        other = issue(ca, keypair_pool, domain="other.example.com", clock=clock)
        log.append(mine, clock)
        log.append(other, clock)
        monitor = CtMonitor(log=log)
        found = monitor.query("mine.example.com", clock)
        assert [e.precert for e in found] == [mine]

    def test_lag_delays_visibility(self, ca, keypair_pool):
        clock = SimulatedClock()
        log = make_log(keypair_pool, delay=ZeroDelay())
        monitor = CtMonitor(log=log, lag=30)
        log.append(issue(ca, keypair_pool, clock=clock), clock)
        assert monitor.query("ta.example.com", clock) == []
        clock.advance(29)
        assert monitor.query("ta.example.com", clock) == []
        clock.advance(1)
        assert len(monitor.query("ta.example.com", clock)) == 1

    def test_entries_since_cursor(self, ca, keypair_pool):
        clock = SimulatedClock()
        log = make_log(keypair_pool, delay=ZeroDelay())
        monitor = CtMonitor(log=log)
        for _ in range(4):
            log.append(issue(ca, keypair_pool, clock=clock), clock)
        assert [e.index for e in monitor.entries_since(2, clock)] == [2, 3]
        assert monitor.entries_since(4, clock) == []
