"""Mock TEE attestation.

A TeeRoot stands in for attestation hardware: it measures a code bundle with
SHA-256 and signs evidence binding that measurement to the TA's public key.
Verification is deliberately a total function; every failure is an outcome
with a reason, never an exception, so callers can log and persist rejections.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, replace
from typing import Mapping, Optional
from urllib.parse import urlparse
from urllib.request import url2pathname

import hashlib

from .model import (
    Clock,
    CodeBundle,
    Evidence,
    KeyPair,
    ProtocolError,
    ReferenceValue,
    public_key_digest,
    verify_signature,
)


class FetchFailed(ProtocolError):
    pass


class EmptyRepository(ProtocolError):
    pass


class VerificationReason(str, enum.Enum):
    OK = "ok"
    BAD_SIGNATURE = "bad_signature"
    RV_MISMATCH = "rv_mismatch"
    PK_MISMATCH = "pk_mismatch"
    UNKNOWN_ROOT = "unknown_root"
    STALE = "stale"


@dataclass(frozen=True)
class VerificationOutcome:
    accepted: bool
    reason: VerificationReason

    def __post_init__(self):
        if self.accepted != (self.reason == VerificationReason.OK):
            raise ValueError("outcome accepted iff reason is ok")

    @classmethod
    def ok(cls) -> "VerificationOutcome":
        return cls(True, VerificationReason.OK)

    @classmethod
    def rejected(cls, reason: VerificationReason) -> "VerificationOutcome":
        return cls(False, reason)


@dataclass
class TeeRoot:
    """Root of trust for evidence signatures; the desk-scale stand-in for a
    hardware vendor key."""

    tee_id: str
    keypair: KeyPair

    @classmethod
    def generate(cls, tee_id: str = "mock-tee") -> "TeeRoot":
        return cls(tee_id=tee_id, keypair=KeyPair.generate())

    @property
    def public_der(self) -> bytes:
        return self.keypair.public_der


def compute_reference_value(bundle: CodeBundle) -> ReferenceValue:
    """SHA-256 over the bundle's canonical bytes. The empty bundle measures
    to sha256(b""), e3b0c442...b855."""
    return ReferenceValue(hashlib.sha256(bundle.canonical_bytes()).digest())


def fetch_code(repository: str, commit_id: str = "") -> CodeBundle:
    """Fetch a directory tree from a local path or file:// URL.

    There is no compilation step at desk scale: a TA is its source tree.
    commit_id is recorded as provenance in the bundle origin; nested .git
    directories are excluded so checkout metadata never changes the
    measurement.
    """
    parsed = urlparse(repository)
    if parsed.scheme == "file":
        root = url2pathname(parsed.path)
    elif parsed.scheme in ("", None) or len(parsed.scheme) == 1:  # bare path, or C:\ on windows
        root = repository
    else:
        raise FetchFailed(f"unsupported origin scheme {parsed.scheme!r} in {repository!r}")

    if not os.path.isdir(root):
        raise FetchFailed(f"origin {repository!r} does not resolve to a directory")

    files: dict[str, bytes] = {}
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = sorted(d for d in dirnames if d != ".git")
        for name in sorted(filenames):
            full = os.path.join(dirpath, name)
            if not os.path.isfile(full):
                continue
            rel = os.path.relpath(full, root).replace(os.sep, "/")
            with open(full, "rb") as handle:
                files[rel] = handle.read()
    if not files:
        raise EmptyRepository(f"origin {repository!r} contains no files")

    origin = f"{repository}@{commit_id}" if commit_id else repository
    return CodeBundle(files=files, origin=origin)


def build_and_measure(repository: str, commit_id: str = "") -> tuple[CodeBundle, ReferenceValue]:
    bundle = fetch_code(repository, commit_id)
    return bundle, compute_reference_value(bundle)


def generate_evidence(root: TeeRoot, rv: ReferenceValue, public_der: bytes, clock: Clock) -> Evidence:
    """Sign evidence binding rv to the key behind public_der, stamped with
    the clock's current time."""
    draft = Evidence(
        rv=rv,
        pk_digest=public_key_digest(public_der),
        tee_id=root.tee_id,
        issued_at=clock.now(),
        signature=b"",
    )
    return replace(draft, signature=root.keypair.sign(draft.signed_payload()))


def verify_evidence(
    ev: Evidence,
    expected_rv: ReferenceValue,
    public_der: bytes,
    root_public_der: bytes,
    *,
    max_age: Optional[int] = None,
    clock: Optional[Clock] = None,
) -> VerificationOutcome:
    """Check evidence against an expected measurement and key.

    Order matters and is observable in the reason: the root signature is
    checked first (any payload tamper lands here, since the payload is what
    is signed), then the measurement, then the key binding. Freshness is
    checked only when max_age is given; it is off by default because desk
    scale re-verifies on demand rather than caching evidence.
    """
    if not verify_signature(root_public_der, ev.signed_payload(), ev.signature):
        return VerificationOutcome.rejected(VerificationReason.BAD_SIGNATURE)
    if ev.rv != expected_rv:
        return VerificationOutcome.rejected(VerificationReason.RV_MISMATCH)
    if ev.pk_digest != public_key_digest(public_der):
        return VerificationOutcome.rejected(VerificationReason.PK_MISMATCH)
    if max_age is not None and clock is not None and clock.now() - ev.issued_at > max_age:
        return VerificationOutcome.rejected(VerificationReason.STALE)
    return VerificationOutcome.ok()


def verify_evidence_with_anchors(
    ev: Evidence,
    expected_rv: ReferenceValue,
    public_der: bytes,
    anchors: Mapping[str, bytes],
    *,
    max_age: Optional[int] = None,
    clock: Optional[Clock] = None,
) -> VerificationOutcome:
    """Same as verify_evidence, but the root key is looked up by the
    evidence's tee_id in a trust-anchor set; an unrecognized id is
    unknown_root before any signature math runs."""
    root_public_der = anchors.get(ev.tee_id)
    if root_public_der is None:
        return VerificationOutcome.rejected(VerificationReason.UNKNOWN_ROOT)
    return verify_evidence(ev, expected_rv, public_der, root_public_der, max_age=max_age, clock=clock)
