"""Verifier core: account registration, TA provisioning, certificate-log
monitoring, status lookup, and user notification.

The verifier is the trusted third party users delegate verification to. A TA
registration only makes a server *eligible*: is_active stays false until the
monitoring pass has seen the TA's own certificate in the log, and any
certificate for a registered domain under a different key becomes a
violation on an append-only ledger plus a push to every subscriber.
"""

from __future__ import annotations

import base64
import logging
import secrets
import threading
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

from ..attestation import (
    EmptyRepository,
    FetchFailed,
    VerificationReason,
    build_and_measure,
    verify_evidence_with_anchors,
)
from ..ctlog import CtMonitor, LogEntry
from ..model import Clock, Evidence, ProtocolError, canonicalize_domain
from ..pki import Precertificate
from .notify import DeliveryReport, PushNotifier
from .store import Store, ServiceAccount, Subscription, TaServer, TaViolation, serialized_size

log = logging.getLogger(__name__)

DEFAULT_POLL_INTERVAL_SECONDS = 600
MAX_SUBSCRIPTION_RECORD_BYTES = 400


class Unauthorized(ProtocolError):
    pass


class NotFound(ProtocolError):
    pass


class BuildFailed(ProtocolError):
    pass


class PreexistingCertificate(ProtocolError):
    pass


class EvidenceRejected(ProtocolError):
    def __init__(self, reason: VerificationReason):
        super().__init__(f"evidence rejected: {reason.value}")
        self.reason = reason


class MalformedSubscription(ProtocolError):
    pass


@dataclass
class TaStatus:
    """What a user (or the status page) learns about a domain."""

    domain: str
    valid: bool
    activated: bool
    rv_hex: str
    repository: str
    commit_id: str
    registered_at: int
    violations: list[TaViolation]

    def as_dict(self) -> dict:
        return {
            "domain": self.domain,
            "valid": self.valid,
            "activated": self.activated,
            "rv": self.rv_hex,
            "repository": self.repository,
            "commit_id": self.commit_id,
            "registered_at": self.registered_at,
            "violations": [
                {"id": v.id, "created_at": v.created_at, "offending_log_index": v.offending_log_index}
                for v in self.violations
            ],
        }


class Verifier:
    def __init__(
        self,
        store: Store,
        anchors: Mapping[str, bytes],
        monitor: CtMonitor,
        push_keypair,
        admin_credential: str,
        clock: Clock,
        notifier: Optional[PushNotifier] = None,
        poll_interval: int = DEFAULT_POLL_INTERVAL_SECONDS,
        builder: Callable = build_and_measure,
    ):
        self.store = store
        self.anchors = dict(anchors)
        self.monitor = monitor
        self.admin_credential = admin_credential
        self.clock = clock
        self.notifier = notifier or PushNotifier(push_keypair)
        self.poll_interval = poll_interval
        self.builder = builder

    # -- accounts ------------------------------------------------------------

    def register_service(self, owner_credential: str, name: str) -> ServiceAccount:
        if not secrets.compare_digest(owner_credential, self.admin_credential):
            raise Unauthorized("bad admin credential")
        token = base64.b64encode(secrets.token_bytes(32)).decode("ascii")
        return self.store.insert_service(name, token)

    def _authenticate(self, token: str) -> ServiceAccount:
        account = self.store.service_by_token(token)
        if account is None or not account.is_active:
            raise Unauthorized("unknown or inactive service token")
        return account

    # -- provisioning ----------------------------------------------------------

    def provision_ta(
        self,
        token: str,
        repository: str,
        commit_id: str,
        domain: str,
        public_der: bytes,
        evidence: Evidence,
    ) -> TaServer:
        """Register a TA server for a domain.

        Order is load-bearing: authentication, then an independent build and
        measurement of the claimed code, then the certificate-log check, then
        evidence verification, and only then persistence. A rejection at any
        step leaves no rows behind.
        """
        account = self._authenticate(token)
        domain = canonicalize_domain(domain)

        try:
            _, rv = self.builder(repository, commit_id)
        except (FetchFailed, EmptyRepository) as exc:
            raise BuildFailed(str(exc)) from exc

        superseded: Optional[TaServer] = None
        with self.store.transaction():
            known_keys = {s.public_key for s in self.store.ta_servers_for_domain(domain)}
            for entry in self.monitor.query(domain, self.clock):
                if entry.precert.public_key not in known_keys:
                    raise PreexistingCertificate(
                        f"log entry {entry.index} already names {domain} under an unknown key"
                    )

            outcome = verify_evidence_with_anchors(evidence, rv, public_der, self.anchors)
            if not outcome.accepted:
                raise EvidenceRejected(outcome.reason)

            previous = self.store.latest_ta_server(domain)
            code = self.store.insert_ta_code(repository, commit_id, rv.hex(), account.id)
            server = self.store.insert_ta_server(
                domain=domain,
                public_key=public_der,
                quote=evidence,
                created_at=self.clock.now(),
                service_id=account.id,
                code_id=code.id,
            )
            if previous is not None:
                self.store.deactivate_ta_server(previous.id)
                self.store.deactivate_ta_code(previous.code)
                superseded = previous

        if superseded is not None:
            self.notify_reregistration(domain, superseded=superseded, new_rv_hex=rv.hex())
        return server

    # -- status -----------------------------------------------------------------

    def get_ta_status(self, domain: str) -> TaStatus:
        domain = canonicalize_domain(domain)
        servers = self.store.ta_servers_for_domain(domain)
        if not servers:
            raise NotFound(f"no TA registered for {domain}")
        latest = servers[-1]
        code = self.store.ta_code_by_id(latest.code)
        violations = self.store.violations_for_server(latest.id)
        return TaStatus(
            domain=domain,
            valid=latest.is_active and not violations,
            activated=latest.is_active,
            rv_hex=code.rv_hex if code else "",
            repository=code.repository if code else "",
            commit_id=code.commit_id if code else "",
            registered_at=latest.created_at,
            violations=violations,
        )

    # -- monitoring ---------------------------------------------------------------

    def monitoring_step(self) -> list[TaViolation]:
        """Process newly published log entries exactly once.

        For each entry: a key match on the domain's latest server activates
        it; a key mismatch is a violation (recorded, then pushed to the
        server's subscribers); an unregistered domain is ignored. The cursor
        advances in the same transaction as the state changes, so a restart
        neither skips nor replays entries.
        """
        try:
            entries = self.monitor.entries_since(self.store.monitor_cursor(), self.clock)
        except Exception as exc:  # monitor unreachable: retry next tick
            log.warning("monitor poll failed, will retry: %s", exc)
            return []

        created: list[TaViolation] = []
        with self.store.transaction():
            cursor = self.store.monitor_cursor()
            for entry in entries:
                if entry.index < cursor:
                    continue
                violation = self._process_entry(entry)
                if violation is not None:
                    created.append(violation)
                cursor = entry.index + 1
            self.store.set_monitor_cursor(cursor)

        for violation in created:
            self.notify_violation(violation)
        return created

    def _process_entry(self, entry: LogEntry) -> Optional[TaViolation]:
        precert: Precertificate = entry.precert
        latest = self.store.latest_ta_server(precert.domain)
        if latest is None:
            return None
        if latest.public_key == precert.public_key:
            if not latest.is_active:
                self.store.activate_ta_server(latest.id, entry.index)
                log.info("activated %s via log entry %d", precert.domain, entry.index)
            return None
        log.warning(
            "violation: log entry %d names %s under a foreign key", entry.index, precert.domain
        )
        return self.store.insert_violation(
            created_at=self.clock.now(),
            offending_log_index=entry.index,
            server_id=latest.id,
            service_id=latest.service,
        )

    # -- subscriptions ---------------------------------------------------------------

    def subscribe(self, domain: str, endpoint: str, p256dh: str, auth: str) -> Subscription:
        domain = canonicalize_domain(domain)
        server = self.store.latest_ta_server(domain)
        if server is None:
            raise NotFound(f"no TA registered for {domain}")
        if not endpoint or not p256dh or not auth:
            raise MalformedSubscription("endpoint, p256dh and auth are all required")
        existing = self.store.find_subscription(endpoint, server.id)
        if existing is not None:
            return existing
        record = Subscription(id=0, endpoint=endpoint, p256dh=p256dh, auth=auth, server=server.id)
        if serialized_size(record) > MAX_SUBSCRIPTION_RECORD_BYTES:
            raise MalformedSubscription(
                f"subscription record exceeds {MAX_SUBSCRIPTION_RECORD_BYTES} bytes"
            )
        return self.store.insert_subscription(endpoint, p256dh, auth, server.id)

    def get_subscription_config(self) -> dict:
        return {"public_key": self.notifier.public_key_b64}

    # -- notifications -------------------------------------------------------------------

    def notify_violation(self, violation: TaViolation) -> DeliveryReport:
        server = self.store.ta_server_by_id(violation.server)
        subscriptions = self.store.subscriptions_for_server(violation.server)
        payload = {
            "kind": "violation",
            "domain": server.domain if server else "",
            "violation_id": violation.id,
            "created_at": violation.created_at,
            "offending_log_index": violation.offending_log_index,
        }
        return self.notifier.deliver(subscriptions, payload)

    def notify_broadcast(self, owner_credential: str, message: str) -> DeliveryReport:
        if not secrets.compare_digest(owner_credential, self.admin_credential):
            raise Unauthorized("bad admin credential")
        payload = {"kind": "broadcast", "message": message}
        return self.notifier.deliver(self.store.all_subscriptions(), payload)

    def notify_reregistration(
        self, domain: str, superseded: Optional[TaServer] = None, new_rv_hex: str = ""
    ) -> DeliveryReport:
        """Tell the superseded server's subscribers that the domain has been
        re-provisioned; fires even when the new code and key are identical."""
        if superseded is None:
            servers = self.store.ta_servers_for_domain(domain)
            if len(servers) < 2:
                return DeliveryReport(attempted=0, delivered=0)
            superseded = servers[-2]
        payload = {"kind": "reregistered", "domain": domain, "new_rv": new_rv_hex}
        return self.notifier.deliver(self.store.subscriptions_for_server(superseded.id), payload)


class MonitorWorker:
    """Background thread driving monitoring_step on a real-time cadence; the
    scenario harness calls monitoring_step directly instead."""

    def __init__(self, verifier: Verifier, interval_seconds: Optional[float] = None):
        self.verifier = verifier
        self.interval = interval_seconds if interval_seconds is not None else verifier.poll_interval
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, name="ct-monitor", daemon=True)

    def start(self) -> "MonitorWorker":
        self._thread.start()
        return self

    def _run(self) -> None:
        while not self._stop.wait(self.interval):
            try:
                self.verifier.monitoring_step()
            except Exception:
                log.exception("monitoring step failed; continuing")

    def stop(self) -> None:
        self._stop.set()
        self._thread.join(timeout=5)
