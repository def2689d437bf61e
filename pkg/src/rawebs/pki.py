"""Certificates, SCTs, and the mock certificate authority.

Certificates here are deliberately not X.509: a fixed-field binary record is
enough to carry the bindings the protocol cares about (domain, public key,
validity, log receipts) while keeping every byte accountable. A
precertificate is the same record with the poison flag set and no embedded
receipts; its encoding is what the log hashes.

Wire layout (lengths 8-byte big-endian unless noted):

    "RAWEBS-CERT1" || serial(8) || len || domain || len || public_key_der
    || not_before(8) || not_after(8) || len || issuer
    || poison(1: 0x01/0x00) || sct_count(2) || scts...

and each embedded SCT is len || log_id || timestamp(8) || entry_hash(32)
|| len || signature.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass, field, replace

from .model import (
    ByteReader,
    Clock,
    KeyPair,
    ProtocolError,
    canonicalize_domain,
    length_prefixed,
    load_public_key,
    u64be,
    verify_signature,
)

CERT_MAGIC = b"RAWEBS-CERT1"
SCT_MAGIC = b"RAWEBS-SCT1"

DEFAULT_VALIDITY_SECONDS = 90 * 24 * 3600


class SctMismatch(ProtocolError):
    pass


@dataclass(frozen=True)
class Sct:
    """Signed certificate timestamp: the log's promise to publish an entry.

    The signed payload is "RAWEBS-SCT1" || len(log_id) || log_id
    || timestamp(8) || entry_hash; timestamp is the submission time.
    """

    log_id: str
    timestamp: int
    entry_hash: bytes
    signature: bytes

    def __post_init__(self):
        if len(self.entry_hash) != 32:
            raise ValueError("entry hash must be exactly 32 bytes")

    def signed_payload(self) -> bytes:
        return (
            SCT_MAGIC
            + length_prefixed(self.log_id.encode("utf-8"))
            + u64be(self.timestamp)
            + self.entry_hash
        )

    def encode(self) -> bytes:
        return (
            length_prefixed(self.log_id.encode("utf-8"))
            + u64be(self.timestamp)
            + self.entry_hash
            + length_prefixed(self.signature)
        )

    @classmethod
    def decode_from(cls, reader: ByteReader) -> "Sct":
        log_id = reader.field().decode("utf-8")
        timestamp = reader.u64()
        entry_hash = reader.take(32)
        signature = reader.field()
        return cls(log_id=log_id, timestamp=timestamp, entry_hash=entry_hash, signature=signature)


def verify_sct(sct: Sct, precert: "Precertificate", log_public_der: bytes) -> bool:
    """Opportunistic receipt check; the monitoring path stays authoritative
    even when servers skip stapling these."""
    if sct.entry_hash != precert.entry_hash():
        return False
    return verify_signature(log_public_der, sct.signed_payload(), sct.signature)


def _encode_cert(
    serial: int,
    domain: str,
    public_key: bytes,
    not_before: int,
    not_after: int,
    issuer: str,
    poison: bool,
    scts: tuple[Sct, ...],
) -> bytes:
    out = bytearray(CERT_MAGIC)
    out += u64be(serial)
    out += length_prefixed(domain.encode("utf-8"))
    out += length_prefixed(public_key)
    out += u64be(not_before)
    out += u64be(not_after)
    out += length_prefixed(issuer.encode("utf-8"))
    out += b"\x01" if poison else b"\x00"
    out += len(scts).to_bytes(2, "big")
    for sct in scts:
        out += sct.encode()
    return bytes(out)


def _decode_cert(data: bytes) -> tuple[int, str, bytes, int, int, str, bool, tuple[Sct, ...]]:
    reader = ByteReader(data)
    if reader.take(len(CERT_MAGIC)) != CERT_MAGIC:
        raise ValueError("not a certificate encoding")
    serial = reader.u64()
    domain = reader.field().decode("utf-8")
    public_key = reader.field()
    not_before = reader.u64()
    not_after = reader.u64()
    issuer = reader.field().decode("utf-8")
    poison_byte = reader.take(1)
    if poison_byte not in (b"\x00", b"\x01"):
        raise ValueError("malformed poison flag")
    count = reader.u16()
    scts = tuple(Sct.decode_from(reader) for _ in range(count))
    reader.expect_end()
    return serial, domain, public_key, not_before, not_after, issuer, poison_byte == b"\x01", scts


@dataclass(frozen=True)
class Precertificate:
    """The pre-publication form of a certificate: poison flag set, no
    embedded receipts. This is the exact byte string the log commits to."""

    serial: int
    domain: str
    public_key: bytes
    not_before: int
    not_after: int
    issuer: str

    poison = True
    embedded_scts: tuple[Sct, ...] = ()

    def __post_init__(self):
        if self.not_before >= self.not_after:
            raise ValueError("validity window is empty")

    def encode(self) -> bytes:
        return _encode_cert(
            self.serial, self.domain, self.public_key, self.not_before,
            self.not_after, self.issuer, True, (),
        )

    def entry_hash(self) -> bytes:
        return hashlib.sha256(self.encode()).digest()

    @classmethod
    def decode(cls, data: bytes) -> "Precertificate":
        serial, domain, public_key, not_before, not_after, issuer, poison, scts = _decode_cert(data)
        if not poison or scts:
            raise ValueError("not a precertificate: poison clear or receipts present")
        return cls(serial, domain, public_key, not_before, not_after, issuer)


@dataclass(frozen=True)
class Certificate:
    """Final certificate: poison flag clear, at least one embedded SCT."""

    serial: int
    domain: str
    public_key: bytes
    not_before: int
    not_after: int
    issuer: str
    embedded_scts: tuple[Sct, ...]

    poison = False

    def __post_init__(self):
        if self.not_before >= self.not_after:
            raise ValueError("validity window is empty")
        if not self.embedded_scts:
            raise ValueError("certificate must embed at least one receipt")

    def encode(self) -> bytes:
        return _encode_cert(
            self.serial, self.domain, self.public_key, self.not_before,
            self.not_after, self.issuer, False, tuple(self.embedded_scts),
        )

    @classmethod
    def decode(cls, data: bytes) -> "Certificate":
        serial, domain, public_key, not_before, not_after, issuer, poison, scts = _decode_cert(data)
        if poison:
            raise ValueError("poisoned encoding is a precertificate")
        return cls(serial, domain, public_key, not_before, not_after, issuer, scts)


class CertificateAuthority:
    """Accepts any well-formed request for a domain it is asked about; the
    point of the exercise is that domain validation alone is spoofable, and
    the attestation layer above is what adds bite."""

    def __init__(self, name: str = "rawebs-ca", validity_seconds: int = DEFAULT_VALIDITY_SECONDS):
        self.name = name
        self.validity_seconds = validity_seconds
        self._serial = 0
        self._lock = threading.Lock()

    def _next_serial(self) -> int:
        with self._lock:
            self._serial += 1
            return self._serial

    def issue_precertificate(self, domain: str, public_der: bytes, clock: Clock) -> Precertificate:
        canonical = canonicalize_domain(domain)
        if canonical != domain:
            from .model import InvalidDomain

            raise InvalidDomain(f"domain {domain!r} is not in canonical form")
        load_public_key(public_der)  # well-formed DER or ValueError
        now = clock.now()
        return Precertificate(
            serial=self._next_serial(),
            domain=canonical,
            public_key=public_der,
            not_before=now,
            not_after=now + self.validity_seconds,
            issuer=self.name,
        )

    def finalize_certificate(self, precert: Precertificate, scts: list[Sct]) -> Certificate:
        if not scts:
            raise SctMismatch("at least one log receipt is required")
        expected = precert.entry_hash()
        for sct in scts:
            if sct.entry_hash != expected:
                raise SctMismatch(f"receipt from {sct.log_id!r} is for a different entry")
        return Certificate(
            serial=precert.serial,
            domain=precert.domain,
            public_key=precert.public_key,
            not_before=precert.not_before,
            not_after=precert.not_after,
            issuer=precert.issuer,
            embedded_scts=tuple(scts),
        )
