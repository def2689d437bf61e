"""Core protocol data model.

Everything that crosses a trust boundary in this package is encoded with
length-prefixed field concatenation: each variable-length field is preceded
by its length as an 8-byte big-endian unsigned integer, fixed-width integers
are 8-byte big-endian, and there is no delimiter parsing anywhere. That keeps
signed payloads free of injection ambiguity and makes every encoding bit-exact
and reproducible.
"""

from __future__ import annotations

import base64
import hashlib
import re
import struct
import threading
import time
from dataclasses import dataclass, field

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric import padding, rsa
from cryptography.hazmat.primitives.asymmetric.rsa import RSAPrivateKey, RSAPublicKey

RSA_KEY_BITS = 2048
RSA_PUBLIC_EXPONENT = 65537

MAX_DOMAIN_LENGTH = 253
MAX_LABEL_LENGTH = 63

EVIDENCE_MAGIC = b"RAWEBS-EV1"

_LABEL_RE = re.compile(r"^[a-z0-9]([a-z0-9-]*[a-z0-9])?$")


class ProtocolError(Exception):
    """Base class for protocol-level failures."""


class InvalidDomain(ProtocolError):
    pass


class SigningFailure(ProtocolError):
    pass


# ---------------------------------------------------------------------------
# encoding primitives

def u64be(value: int) -> bytes:
    if value < 0:
        raise ValueError("unsigned field cannot be negative")
    return struct.pack(">Q", value)


def length_prefixed(data: bytes) -> bytes:
    return u64be(len(data)) + data


class ByteReader:
    """Sequential reader for the length-prefixed encodings; over- and
    under-consumption both raise ValueError so truncated or padded inputs
    never decode."""

    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0

    def take(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise ValueError("truncated encoding")
        out = self._data[self._pos : self._pos + n]
        self._pos += n
        return out

    def u64(self) -> int:
        return struct.unpack(">Q", self.take(8))[0]

    def u16(self) -> int:
        return struct.unpack(">H", self.take(2))[0]

    def field(self) -> bytes:
        return self.take(self.u64())

    def expect_end(self) -> None:
        if self._pos != len(self._data):
            raise ValueError("trailing bytes in encoding")


# ---------------------------------------------------------------------------
# domains

def canonicalize_domain(raw: str) -> str:
    """Lowercase and validate a DNS name.

    Rules: at most 253 characters, labels of 1-63 characters drawn from
    [a-z0-9-] with no leading or trailing hyphen. Internationalized names are
    rejected outright (no punycode conversion, and xn-- labels are refused),
    which removes homograph lookalikes from the domain equality story.
    """
    if not isinstance(raw, str):
        raise InvalidDomain(f"domain must be a string, got {type(raw).__name__}")
    name = raw.lower()
    if not name or len(name) > MAX_DOMAIN_LENGTH:
        raise InvalidDomain(f"domain length {len(name)} outside 1..{MAX_DOMAIN_LENGTH}")
    for label in name.split("."):
        if not 1 <= len(label) <= MAX_LABEL_LENGTH:
            raise InvalidDomain(f"label length {len(label)} outside 1..{MAX_LABEL_LENGTH} in {name!r}")
        if not _LABEL_RE.match(label):
            raise InvalidDomain(f"malformed label {label!r} in {name!r}")
        if label.startswith("xn--"):
            raise InvalidDomain(f"internationalized label {label!r} rejected")
    return name


class Domain(str):
    """A DNS name in canonical form; equality and hashing follow str."""

    def __new__(cls, raw: str) -> "Domain":
        return super().__new__(cls, canonicalize_domain(raw))


# ---------------------------------------------------------------------------
# keys

def public_key_digest(public_der: bytes) -> bytes:
    return hashlib.sha256(public_der).digest()


def load_public_key(public_der: bytes) -> RSAPublicKey:
    key = serialization.load_der_public_key(public_der)
    if not isinstance(key, RSAPublicKey):
        raise ValueError("expected an RSA public key")
    return key


def verify_signature(public_der: bytes, payload: bytes, signature: bytes) -> bool:
    """PKCS#1 v1.5 / SHA-256 verification; returns False on any failure."""
    try:
        load_public_key(public_der).verify(
            signature, payload, padding.PKCS1v15(), hashes.SHA256()
        )
        return True
    except (InvalidSignature, ValueError):
        return False


@dataclass
class KeyPair:
    """RSA-2048 signing pair. Public identity is the DER-encoded
    SubjectPublicKeyInfo; two keys are the same key iff those bytes match."""

    private_key: RSAPrivateKey
    _public_der: bytes = field(init=False, repr=False)

    def __post_init__(self):
        self._public_der = self.private_key.public_key().public_bytes(
            serialization.Encoding.DER,
            serialization.PublicFormat.SubjectPublicKeyInfo,
        )

    @classmethod
    def generate(cls) -> "KeyPair":
        return cls(rsa.generate_private_key(RSA_PUBLIC_EXPONENT, RSA_KEY_BITS))

    @property
    def public_der(self) -> bytes:
        return self._public_der

    @property
    def public_digest(self) -> bytes:
        return public_key_digest(self._public_der)

    def sign(self, payload: bytes) -> bytes:
        try:
            return self.private_key.sign(payload, padding.PKCS1v15(), hashes.SHA256())
        except Exception as exc:  # key too small, backend failure
            raise SigningFailure(str(exc)) from exc

    def private_pem(self) -> bytes:
        return self.private_key.private_bytes(
            serialization.Encoding.PEM,
            serialization.PrivateFormat.PKCS8,
            serialization.NoEncryption(),
        )

    @classmethod
    def from_private_pem(cls, pem: bytes) -> "KeyPair":
        key = serialization.load_pem_private_key(pem, password=None)
        if not isinstance(key, RSAPrivateKey):
            raise ValueError("expected an RSA private key")
        return cls(key)


# ---------------------------------------------------------------------------
# code bundles and measurements

@dataclass
class CodeBundle:
    """A fetched code tree: relative paths mapped to file bytes, plus a label
    recording where it came from. The canonical byte form walks the files in
    ascending path order and emits len(path) || path || len(content) || content
    with 8-byte big-endian lengths; it is the sole input to measurement."""

    files: dict[str, bytes]
    origin: str = ""

    def __post_init__(self):
        self.files = dict(self.files)

    def canonical_bytes(self) -> bytes:
        out = bytearray()
        for path in sorted(self.files):
            out += length_prefixed(path.encode("utf-8"))
            out += length_prefixed(self.files[path])
        return bytes(out)

    def to_bytes(self) -> bytes:
        return length_prefixed(self.origin.encode("utf-8")) + self.canonical_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "CodeBundle":
        reader = ByteReader(data)
        origin = reader.field().decode("utf-8")
        files: dict[str, bytes] = {}
        while True:
            try:
                path = reader.field().decode("utf-8")
            except ValueError:
                break
            files[path] = reader.field()
        return cls(files=files, origin=origin)

    def __eq__(self, other):
        if not isinstance(other, CodeBundle):
            return NotImplemented
        return self.origin == other.origin and self.files == other.files


@dataclass(frozen=True)
class ReferenceValue:
    """SHA-256 measurement of a code bundle; always exactly 32 bytes."""

    digest: bytes

    def __post_init__(self):
        if not isinstance(self.digest, bytes) or len(self.digest) != 32:
            raise ValueError("reference value must be exactly 32 bytes")

    def hex(self) -> str:
        return self.digest.hex()

    @classmethod
    def from_hex(cls, text: str) -> "ReferenceValue":
        return cls(bytes.fromhex(text))


@dataclass(frozen=True)
class Evidence:
    """Attestation evidence: binds a code measurement to a public key under
    a TEE root signature.

    The signed payload is
        "RAWEBS-EV1" || rv || pk_digest || len(tee_id) || tee_id || issued_at
    and the wire form is len(payload) || payload || len(signature) || signature,
    also exported as base64 text for embedding in JSON bodies.
    """

    rv: ReferenceValue
    pk_digest: bytes
    tee_id: str
    issued_at: int
    signature: bytes

    def __post_init__(self):
        if len(self.pk_digest) != 32:
            raise ValueError("public key digest must be exactly 32 bytes")

    def signed_payload(self) -> bytes:
        return (
            EVIDENCE_MAGIC
            + self.rv.digest
            + self.pk_digest
            + length_prefixed(self.tee_id.encode("utf-8"))
            + u64be(self.issued_at)
        )

    def to_bytes(self) -> bytes:
        return length_prefixed(self.signed_payload()) + length_prefixed(self.signature)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Evidence":
        outer = ByteReader(data)
        payload = outer.field()
        signature = outer.field()
        outer.expect_end()

        reader = ByteReader(payload)
        magic = reader.take(len(EVIDENCE_MAGIC))
        if magic != EVIDENCE_MAGIC:
            raise ValueError("not an evidence payload")
        rv = ReferenceValue(reader.take(32))
        pk_digest = reader.take(32)
        tee_id = reader.field().decode("utf-8")
        issued_at = reader.u64()
        reader.expect_end()
        return cls(rv=rv, pk_digest=pk_digest, tee_id=tee_id, issued_at=issued_at, signature=signature)

    def to_base64(self) -> str:
        return base64.b64encode(self.to_bytes()).decode("ascii")

    @classmethod
    def from_base64(cls, text: str) -> "Evidence":
        return cls.from_bytes(base64.b64decode(text))


# ---------------------------------------------------------------------------
# clocks

class Clock:
    """Time source handed to every component; integer seconds since epoch."""

    def now(self) -> int:
        raise NotImplementedError


class RealClock(Clock):
    def now(self) -> int:
        return int(time.time())


class SimulatedClock(Clock):
    """Deterministic clock for scenarios: time moves only when advanced,
    never backward. Synchronized so the monitor worker thread and the
    scenario driver can share one instance."""

    def __init__(self, start: int = 0):
        self._now = start
        self._lock = threading.Lock()

    def now(self) -> int:
        with self._lock:
            return self._now

    def advance(self, seconds: int) -> int:
        if seconds < 0:
            raise ValueError("clock cannot move backward")
        with self._lock:
            self._now += seconds
            return self._now

    def advance_to(self, timestamp: int) -> int:
        with self._lock:
            if timestamp < self._now:
                raise ValueError(f"clock cannot move backward ({timestamp} < {self._now})")
            self._now = timestamp
            return self._now
