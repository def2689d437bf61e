"""Core model tests.

The canonical-bytes expectations here are hand-rolled independently of the
implementation (struct.pack concatenation written out in the test) so they
act as an oracle for the length-prefixed encoding rule.
"""

import struct

import pytest
from hypothesis import given, strategies as st

from rawebs.model import (
    Clock,
    CodeBundle,
    Domain,
    Evidence,
    InvalidDomain,
    KeyPair,
    RealClock,
    ReferenceValue,
    SimulatedClock,
    canonicalize_domain,
    public_key_digest,
    verify_signature,
)


def hand_rolled_canonical(files: dict[str, bytes]) -> bytes:
    out = b""
    for path in sorted(files):
        raw = path.encode("utf-8")
        out += struct.pack(">Q", len(raw)) + raw
        out += struct.pack(">Q", len(files[path])) + files[path]
    return out


class TestDomain:
    def test_lowercases(self):
        assert canonicalize_domain("Example.COM") == "example.com"

    def test_canonicalization_idempotent(self):
        assert canonicalize_domain(canonicalize_domain("A.B.C")) == "a.b.c"

    def test_equality_on_canonical_form(self):
        assert Domain("TA.Example.com") == Domain("ta.example.com")

    @pytest.mark.parametrize(
        "raw",
        [
            "",
            ".",
            "example..com",
            ".example.com",
            "example.com.",
            "-bad.example.com",
            "bad-.example.com",
            "under_score.example.com",
            "white space.example.com",
            "xn--bcher-kva.example.com",
            "bücher.example.com",
            "a" * 64 + ".example.com",
            ("a." * 127) + "toolong",
        ],
    )
    def test_rejects_malformed(self, raw):
        with pytest.raises(InvalidDomain):
            canonicalize_domain(raw)

    def test_length_boundaries_accepted(self):
        label63 = "a" * 63
        assert canonicalize_domain(label63 + ".example.com")
        # exactly 253 characters total
        name = ".".join(["a" * 49] * 5) + ".abc"
        assert len(name) == 253
        assert canonicalize_domain(name) == name

    @given(st.text(min_size=0, max_size=300))
    def test_never_returns_non_canonical(self, raw):
        try:
            canonical = canonicalize_domain(raw)
        except InvalidDomain:
            return
        assert canonicalize_domain(canonical) == canonical
        assert canonical == canonical.lower()


class TestCodeBundle:
    def test_canonical_bytes_matches_hand_rolled_oracle(self):
        files = {"src/main.py": b"print('hi')\n", "README.md": b"docs\n"}
        bundle = CodeBundle(files=files, origin="demo")
        assert bundle.canonical_bytes() == hand_rolled_canonical(files)

    def test_single_file_oracle_literal(self):
        bundle = CodeBundle(files={"a": b"x"})
        assert bundle.canonical_bytes() == (
            b"\x00\x00\x00\x00\x00\x00\x00\x01a" b"\x00\x00\x00\x00\x00\x00\x00\x01x"
        )

    def test_insertion_order_irrelevant(self):
        one = CodeBundle(files={"a": b"1", "b": b"2"})
        two = CodeBundle(files={"b": b"2", "a": b"1"})
        assert one.canonical_bytes() == two.canonical_bytes()

    def test_empty_bundle_allowed(self):
        assert CodeBundle(files={}).canonical_bytes() == b""

    def test_round_trip(self):
        bundle = CodeBundle(files={"x/y.txt": b"\x00\xffbytes"}, origin="file:///tmp/demo@c1")
        assert CodeBundle.from_bytes(bundle.to_bytes()) == bundle

    @given(
        st.dictionaries(
            st.text(min_size=1, max_size=20).filter(lambda s: "\x00" not in s),
            st.binary(max_size=64),
            max_size=8,
        ),
        st.text(max_size=30),
    )
    def test_round_trip_property(self, files, origin):
        bundle = CodeBundle(files=files, origin=origin)
        assert CodeBundle.from_bytes(bundle.to_bytes()) == bundle
        assert bundle.canonical_bytes() == hand_rolled_canonical(files)


class TestReferenceValue:
    def test_requires_32_bytes(self):
        with pytest.raises(ValueError):
            ReferenceValue(b"short")

    def test_hex_round_trip(self):
        rv = ReferenceValue(bytes(range(32)))
        assert ReferenceValue.from_hex(rv.hex()) == rv


class TestKeyPair:
    def test_public_der_stable_and_comparable(self, keypair_pool):
        kp = keypair_pool[0]
        assert kp.public_der == kp.public_der
        assert keypair_pool[0].public_der != keypair_pool[1].public_der

    def test_sign_verify(self, keypair_pool):
        kp = keypair_pool[0]
        sig = kp.sign(b"payload")
        assert verify_signature(kp.public_der, b"payload", sig)
        assert not verify_signature(kp.public_der, b"payload2", sig)
        assert not verify_signature(keypair_pool[1].public_der, b"payload", sig)

    def test_private_pem_round_trip(self, keypair_pool):
        kp = keypair_pool[0]
        again = KeyPair.from_private_pem(kp.private_pem())
        assert again.public_der == kp.public_der

    def test_digest_is_sha256_of_der(self, keypair_pool):
        import hashlib

        der = keypair_pool[0].public_der
        assert public_key_digest(der) == hashlib.sha256(der).digest()


class TestEvidence:
    def make(self, keypair_pool) -> Evidence:
        kp = keypair_pool[0]
        return Evidence(
            rv=ReferenceValue(b"\x11" * 32),
            pk_digest=public_key_digest(kp.public_der),
            tee_id="mock-tee",
            issued_at=1_700_000_000,
            signature=b"\x99" * 256,
        )

    def test_signed_payload_oracle(self, keypair_pool):
        ev = self.make(keypair_pool)
        expected = (
            b"RAWEBS-EV1"
            + b"\x11" * 32
            + public_key_digest(keypair_pool[0].public_der)
            + struct.pack(">Q", len(b"mock-tee"))
            + b"mock-tee"
            + struct.pack(">Q", 1_700_000_000)
        )
        assert ev.signed_payload() == expected

    def test_bytes_round_trip(self, keypair_pool):
        ev = self.make(keypair_pool)
        assert Evidence.from_bytes(ev.to_bytes()) == ev

    def test_base64_round_trip(self, keypair_pool):
        ev = self.make(keypair_pool)
        assert Evidence.from_base64(ev.to_base64()) == ev

    def test_truncated_rejected(self, keypair_pool):
        ev = self.make(keypair_pool)
        with pytest.raises(ValueError):
            Evidence.from_bytes(ev.to_bytes()[:-1])


class TestClock:
    def test_simulated_starts_at_zero(self):
        assert SimulatedClock().now() == 0

    def test_advance(self):
        clock = SimulatedClock(start=100)
        clock.advance(50)
        assert clock.now() == 150

    def test_never_backward(self):
        clock = SimulatedClock()
        clock.advance(10)
        with pytest.raises(ValueError):
            clock.advance(-1)
        with pytest.raises(ValueError):
            clock.advance_to(5)
        assert clock.now() == 10

    def test_advance_to(self):
        clock = SimulatedClock()
        clock.advance_to(77)
        assert clock.now() == 77

    def test_real_clock_is_integer_seconds(self):
        import time

        clock = RealClock()
        assert isinstance(clock, Clock)
        assert abs(clock.now() - int(time.time())) <= 1

    @given(st.lists(st.integers(min_value=0, max_value=10_000), max_size=40))
    def test_monotone_under_any_advance_sequence(self, steps):
        clock = SimulatedClock()
        last = clock.now()
        for step in steps:
            clock.advance(step)
            assert clock.now() >= last
            last = clock.now()
