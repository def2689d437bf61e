"""Signed push delivery.

Instead of full Web-Push payload encryption, every message is a JSON envelope
{payload, signature} where the signature is the verifier's push key over the
payload's canonical JSON bytes. Receivers fetch the push public key once and
verify before displaying anything. Deliveries are plain HTTP POSTs to each
subscription's endpoint; a failed endpoint is counted and skipped, never
retried within the step.
"""

from __future__ import annotations

import base64
import json
import logging
from dataclasses import dataclass
from typing import Iterable, Optional

import httpx

from ..model import KeyPair, verify_signature
from .store import Subscription

log = logging.getLogger(__name__)


def canonical_json(payload: dict) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def sign_push_message(keypair: KeyPair, payload: dict) -> dict:
    return {
        "payload": payload,
        "signature": base64.b64encode(keypair.sign(canonical_json(payload))).decode("ascii"),
    }


def verify_push_message(public_der: bytes, message: dict) -> bool:
    try:
        signature = base64.b64decode(message["signature"])
        return verify_signature(public_der, canonical_json(message["payload"]), signature)
    except (KeyError, TypeError, ValueError):
        return False


@dataclass(frozen=True)
class DeliveryReport:
    attempted: int
    delivered: int

    def as_dict(self) -> dict:
        return {"attempted": self.attempted, "delivered": self.delivered}


class PushNotifier:
    def __init__(self, keypair: KeyPair, timeout: float = 3.0, client: Optional[httpx.Client] = None):
        self.keypair = keypair
        self._client = client or httpx.Client(timeout=timeout)

    @property
    def public_key_b64(self) -> str:
        return base64.b64encode(self.keypair.public_der).decode("ascii")

    def deliver(self, subscriptions: Iterable[Subscription], payload: dict) -> DeliveryReport:
        message = sign_push_message(self.keypair, payload)
        attempted = delivered = 0
        for sub in subscriptions:
            attempted += 1
            try:
                response = self._client.post(sub.endpoint, json=message)
            except httpx.HTTPError as exc:
                log.warning("push to %s failed: %s", sub.endpoint, exc)
                continue
            if 200 <= response.status_code < 300:
                delivered += 1
            else:
                log.warning("push to %s rejected with %s", sub.endpoint, response.status_code)
        return DeliveryReport(attempted=attempted, delivered=delivered)

    def close(self) -> None:
        self._client.close()
