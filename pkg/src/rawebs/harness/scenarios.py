"""Adversarial scenario harness.

Wires a verifier, CA, certificate log, monitor, and TA agent together under a
simulated clock, replays one attack (or the honest flow) per scenario, and
reports what the system did about it. Reports are a pure function of the
ScenarioSpec: all randomness flows from the seed, and all timestamps are
simulated, so a 24-hour merge delay costs no real time.

Scenario catalog:
  happy_path              honest enrollment through activation; ends valid
  domain_impersonation    foreign-key certificate after activation; detected
  reregistration          owner ships new code; subscribers told immediately
  preexisting_cert        attacker certifies the domain first; enrollment refused
  evidence_tamper         registration with mismatched measurement/key; refused
  evasion                 TA page omits the status link; page inspection flags it
  impersonation_during_mmd  attack inside the merge-delay window; measures the
                            undetected interval before the monitor catches up
"""

from __future__ import annotations

import random
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import httpx

from ..agent import TaConfig, ta_serve
from ..attestation import TeeRoot, compute_reference_value, generate_evidence
from ..ctlog import DEFAULT_MMD_SECONDS, CtLog, CtMonitor, DelayPolicy, FixedDelay
from ..model import CodeBundle, KeyPair, SimulatedClock
from ..pki import Certificate, CertificateAuthority
from ..verifier import (
    EvidenceRejected,
    PreexistingCertificate,
    Store,
    Verifier,
)
from ..verifier.notify import PushNotifier
from .push_inbox import PushInbox

DEFAULT_POLL_SECONDS = 600
DEFAULT_STEP_SECONDS = 60
SIM_START = 1_000_000

SCENARIO_NAMES = (
    "happy_path",
    "domain_impersonation",
    "reregistration",
    "preexisting_cert",
    "evidence_tamper",
    "evasion",
    "impersonation_during_mmd",
)

OUTCOMES = ("detected", "prevented", "undetected_in_window", "not_applicable")

TA_DOMAIN = "ta.example.com"
VERIFIER_URL = "https://verifier.example"
ADMIN_CREDENTIAL = "harness-admin"

TA_CODE_V1 = {"server.py": b"def page():\n    return 'hello'\n"}
TA_CODE_V2 = {"server.py": b"def page():\n    return 'hello, v2'\n"}


class ScenarioFailure(AssertionError):
    """A scenario's built-in assertion did not hold."""


@dataclass(frozen=True)
class ScenarioSpec:
    """Parameters of one scenario run; the report is a pure function of this."""

    name: str
    mmd: int = DEFAULT_MMD_SECONDS
    monitor_lag: int = 0
    poll_interval: int = DEFAULT_POLL_SECONDS
    seed: int = 0
    step: int = DEFAULT_STEP_SECONDS

    def __post_init__(self) -> None:
        if self.name not in SCENARIO_NAMES:
            raise ValueError(f"unknown scenario {self.name!r}; expected one of {SCENARIO_NAMES}")
        for label in ("mmd", "monitor_lag", "poll_interval"):
            if getattr(self, label) < 0:
                raise ValueError(f"{label} must be >= 0")
        if self.step <= 0 or self.poll_interval == 0:
            raise ValueError("step and poll_interval must be positive")

    @property
    def detection_bound(self) -> int:
        """Worst-case simulated seconds from attack to violation row."""
        slack = 0 if self.poll_interval % self.step == 0 else self.step
        return self.mmd + self.monitor_lag + self.poll_interval + slack


@dataclass(frozen=True)
class ScenarioEvent:
    time: int
    actor: str
    action: str
    detail: str = ""

    def tsv(self) -> str:
        return f"{self.time}\t{self.actor}\t{self.action}\t{self.detail}"


@dataclass(frozen=True)
class ScenarioReport:
    scenario: str
    outcome: str
    detection_latency: Optional[int]
    notifications_delivered: int
    events: tuple[ScenarioEvent, ...]
    undetected_window: Optional[int] = None

    def __post_init__(self) -> None:
        if self.outcome not in OUTCOMES:
            raise ValueError(f"unknown outcome {self.outcome!r}")
        if (self.detection_latency is not None) != (self.outcome == "detected"):
            raise ValueError("detection_latency must be present exactly when detected")

    def as_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "outcome": self.outcome,
            "detection_latency": self.detection_latency,
            "undetected_window": self.undetected_window,
            "notifications_delivered": self.notifications_delivered,
            "events": [
                {"time": e.time, "actor": e.actor, "action": e.action, "detail": e.detail}
                for e in self.events
            ],
        }


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ScenarioFailure(message)


class _Sim:
    """One scenario's world: every entity shares a simulated clock."""

    def __init__(self, spec: ScenarioSpec, delay: DelayPolicy):
        self.spec = spec
        self.clock = SimulatedClock(start=SIM_START)
        self.rng = random.Random(spec.seed)
        self.events: list[ScenarioEvent] = []

        self.tee = TeeRoot(tee_id="sim-tee", keypair=KeyPair.generate())
        self.log = CtLog(
            log_id="sim-log",
            keypair=KeyPair.generate(),
            mmd=spec.mmd,
            delay=delay,
            seed=spec.seed,
        )
        self.monitor = CtMonitor(log=self.log, lag=spec.monitor_lag)
        self.ca = CertificateAuthority(name="sim-ca")
        self.inbox = PushInbox().start()
        self.http = httpx.Client(timeout=5.0)
        push_key = KeyPair.generate()
        self.verifier = Verifier(
            store=Store(":memory:"),
            anchors={self.tee.tee_id: self.tee.public_der},
            monitor=self.monitor,
            push_keypair=push_key,
            admin_credential=ADMIN_CREDENTIAL,
            clock=self.clock,
            notifier=PushNotifier(push_key, client=self.http),
            poll_interval=spec.poll_interval,
        )
        self.token = self.verifier.register_service(ADMIN_CREDENTIAL, "sim-service").token
        self.record("service", "register", "service account enrolled at verifier")

        self.ta_key = KeyPair.generate()
        self._bundles: dict[str, CodeBundle] = {}
        self.verifier.builder = self._build
        self._published_seen = 0
        self._next_poll = self.clock.now() + spec.poll_interval
        self._active_seen = False

    # -- plumbing -------------------------------------------------------------

    def _build(self, repository: str, commit_id: str):
        bundle = self._bundles[repository]
        return bundle, compute_reference_value(bundle)

    def record(self, actor: str, action: str, detail: str = "") -> None:
        self.events.append(ScenarioEvent(self.clock.now(), actor, action, detail))

    def close(self) -> None:
        self.http.close()
        self.inbox.stop()

    # -- protocol steps --------------------------------------------------------

    def register_code(self, name: str, files: dict) -> str:
        self._bundles[name] = CodeBundle(files=dict(files), origin=name)
        return name

    def provision(self, repository: str, keypair: Optional[KeyPair] = None, commit_id: str = "v1"):
        keypair = keypair or self.ta_key
        bundle = self._bundles[repository]
        rv = compute_reference_value(bundle)
        evidence = generate_evidence(self.tee, rv, keypair.public_der, self.clock)
        row = self.verifier.provision_ta(
            self.token, repository, commit_id, TA_DOMAIN, keypair.public_der, evidence
        )
        self.record("ta", "provision", f"registered {TA_DOMAIN} rv={rv.hex()[:16]}…")
        return row

    def issue_certificate(self, actor: str, keypair: KeyPair) -> Certificate:
        precert = self.ca.issue_precertificate(TA_DOMAIN, keypair.public_der, self.clock)
        sct = self.log.append(precert, self.clock)
        cert = self.ca.finalize_certificate(precert, [sct])
        self.record(actor, "obtain_certificate", f"log entry {self.log.all_entries()[-1].index} for {TA_DOMAIN}")
        return cert

    def subscribe(self, user: str) -> None:
        self.verifier.subscribe(TA_DOMAIN, self.inbox.endpoint(user), "p" * 88, "a" * 24)
        self.record("user", "subscribe", f"{user} subscribed to {TA_DOMAIN} notifications")

    def status(self):
        return self.verifier.get_ta_status(TA_DOMAIN)

    # -- time ------------------------------------------------------------------

    def _observe_publications(self) -> None:
        published = self.log.published_count(self.clock.now())
        entries = self.log.all_entries()
        for index in range(self._published_seen, published):
            self.record("log", "publish", f"entry {index} now public")
        self._published_seen = published

    def _observe_activation(self) -> None:
        latest = self.verifier.store.latest_ta_server(TA_DOMAIN)
        active = latest is not None and latest.is_active
        if active and not self._active_seen:
            self.record("verifier", "activate", f"latest server for {TA_DOMAIN} marked active")
        self._active_seen = active

    def tick(self) -> list:
        """Advance one step of simulated time, polling when the cadence says to."""
        self.clock.advance(self.spec.step)
        self._observe_publications()
        violations = []
        if self.clock.now() >= self._next_poll:
            violations = self.verifier.monitoring_step()
            self._next_poll += self.spec.poll_interval
            for violation in violations:
                self.record(
                    "verifier",
                    "violation",
                    f"log entry {violation.offending_log_index} uses a foreign key",
                )
            self._observe_activation()
        return violations

    def run_until(self, predicate: Callable[[], bool], deadline: int, what: str) -> None:
        while not predicate():
            if self.clock.now() >= deadline:
                raise ScenarioFailure(f"{what} did not happen within the simulated deadline")
            self.tick()

    def run_for(self, seconds: int) -> list:
        """Advance at least `seconds`, collecting any violations created."""
        target = self.clock.now() + seconds
        collected = []
        while self.clock.now() < target:
            collected.extend(self.tick())
        return collected

    def wait_until_active(self) -> None:
        deadline = self.clock.now() + self.spec.detection_bound + 2 * self.spec.poll_interval
        self.run_until(
            lambda: (lambda s: s is not None and s.is_active)(
                self.verifier.store.latest_ta_server(TA_DOMAIN)
            ),
            deadline,
            "activation of the provisioned server",
        )

    def wait_for_violation(self, deadline: int) -> list:
        found: list = []
        while not found:
            if self.clock.now() >= deadline:
                raise ScenarioFailure("no violation detected within the simulated deadline")
            found.extend(self.tick())
        return found


def _enroll_and_activate(sim: _Sim) -> Certificate:
    """Run the honest flow through activation; returns the TA's certificate."""
    sim.register_code("ta-code", TA_CODE_V1)
    sim.provision("ta-code")
    cert = sim.issue_certificate("ta", sim.ta_key)
    sim.wait_until_active()
    return cert


def _final_notification_count(sim: _Sim) -> int:
    return len(sim.inbox.messages())


def _happy_path(spec: ScenarioSpec) -> ScenarioReport:
    sim = _Sim(spec, delay=FixedDelay(None))
    try:
        _enroll_and_activate(sim)
        status = sim.status()
        _require(status.valid, "status must be valid after activation")
        _require(not status.violations, "honest flow must record no violations")
        sim.record("user", "check_status", f"{TA_DOMAIN} verdict valid={status.valid}")
        sim.subscribe("alice")
        sim.run_for(2 * spec.poll_interval)
        status = sim.status()
        _require(status.valid, "status must stay valid with no adversary present")
        _require(not status.violations, "no violations may appear in the honest flow")
        sim.record("user", "check_status", f"{TA_DOMAIN} verdict valid={status.valid}")
        return ScenarioReport(
            scenario=spec.name,
            outcome="not_applicable",
            detection_latency=None,
            notifications_delivered=_final_notification_count(sim),
            events=tuple(sim.events),
        )
    finally:
        sim.close()


def _domain_impersonation(spec: ScenarioSpec) -> ScenarioReport:
    sim = _Sim(spec, delay=FixedDelay(None))
    try:
        _enroll_and_activate(sim)
        sim.subscribe("alice")
        sim.run_for(sim.rng.randrange(0, 4 * spec.poll_interval + 1))

        attack_time = sim.clock.now()
        adversary_key = KeyPair.generate()
        sim.issue_certificate("adversary", adversary_key)

        violations = sim.wait_for_violation(attack_time + spec.detection_bound + spec.step)
        latency = violations[0].created_at - attack_time
        _require(
            latency <= spec.detection_bound,
            f"detection took {latency}s, over the {spec.detection_bound}s bound",
        )
        alerts = [m for m in sim.inbox.messages_for("alice") if m["payload"]["kind"] == "violation"]
        _require(len(alerts) >= 1, "subscriber must receive a violation notification")
        status = sim.status()
        _require(not status.valid, "status must be invalid once a violation is recorded")
        sim.record("user", "alerted", f"alice notified of violation on {TA_DOMAIN}")
        return ScenarioReport(
            scenario=spec.name,
            outcome="detected",
            detection_latency=latency,
            notifications_delivered=_final_notification_count(sim),
            events=tuple(sim.events),
        )
    finally:
        sim.close()


def _reregistration(spec: ScenarioSpec) -> ScenarioReport:
    sim = _Sim(spec, delay=FixedDelay(None))
    try:
        _enroll_and_activate(sim)
        sim.subscribe("alice")
        sim.run_for(sim.rng.randrange(0, 2 * spec.poll_interval + 1))

        sim.register_code("ta-code-v2", TA_CODE_V2)
        rereg_time = sim.clock.now()
        sim.provision("ta-code-v2", commit_id="v2")
        sim.record("verifier", "supersede", "previous server deactivated pending new activation")

        notices = [
            m for m in sim.inbox.messages_for("alice") if m["payload"]["kind"] == "reregistered"
        ]
        _require(len(notices) == 1, "existing subscriber must be told about the re-registration")
        new_rv = compute_reference_value(CodeBundle(files=TA_CODE_V2, origin="ta-code-v2")).hex()
        _require(notices[0]["payload"]["new_rv"] == new_rv, "notice must carry the new measurement")
        latency = sim.clock.now() - rereg_time

        _require(not sim.status().valid, "status must be invalid until the new server activates")

        sim.issue_certificate("ta", sim.ta_key)
        sim.wait_until_active()
        status = sim.status()
        _require(status.valid, "status must become valid after re-activation")
        _require(status.rv_hex == new_rv, "status must show the new measurement")
        sim.record("user", "check_status", f"{TA_DOMAIN} verdict valid={status.valid}")
        return ScenarioReport(
            scenario=spec.name,
            outcome="detected",
            detection_latency=latency,
            notifications_delivered=_final_notification_count(sim),
            events=tuple(sim.events),
        )
    finally:
        sim.close()


def _preexisting_cert(spec: ScenarioSpec) -> ScenarioReport:
    sim = _Sim(spec, delay=FixedDelay(None))
    try:
        adversary_key = KeyPair.generate()
        sim.issue_certificate("adversary", adversary_key)
        sim.run_until(
            lambda: sim.monitor.visible_count(sim.clock) > 0,
            sim.clock.now() + spec.detection_bound + spec.step,
            "publication of the adversary's certificate",
        )
        sim.record("monitor", "observe", f"certificate for {TA_DOMAIN} visible before enrollment")

        sim.register_code("ta-code", TA_CODE_V1)
        try:
            sim.provision("ta-code")
        except PreexistingCertificate:
            sim.record("verifier", "refuse", "enrollment terminated: unexplained certificate exists")
        else:
            raise ScenarioFailure("provisioning must be refused when a foreign certificate exists")
        _require(
            sim.verifier.store.ta_servers_for_domain(TA_DOMAIN) == [],
            "a refused enrollment must leave no server rows",
        )
        return ScenarioReport(
            scenario=spec.name,
            outcome="prevented",
            detection_latency=None,
            notifications_delivered=_final_notification_count(sim),
            events=tuple(sim.events),
        )
    finally:
        sim.close()


def _evidence_tamper(spec: ScenarioSpec) -> ScenarioReport:
    sim = _Sim(spec, delay=FixedDelay(None))
    try:
        sim.register_code("ta-code", TA_CODE_V1)
        sim.register_code("other-code", TA_CODE_V2)
        wrong_rv = compute_reference_value(sim._bundles["other-code"])
        foreign_key = KeyPair.generate()

        attempts = {
            "evidence measures different code": generate_evidence(
                sim.tee, wrong_rv, sim.ta_key.public_der, sim.clock
            ),
            "evidence binds a different key": generate_evidence(
                sim.tee,
                compute_reference_value(sim._bundles["ta-code"]),
                foreign_key.public_der,
                sim.clock,
            ),
        }
        for label, evidence in attempts.items():
            try:
                sim.verifier.provision_ta(
                    sim.token, "ta-code", "v1", TA_DOMAIN, sim.ta_key.public_der, evidence
                )
            except EvidenceRejected as exc:
                sim.record("verifier", "refuse", f"{label}: {exc.reason.value}")
            else:
                raise ScenarioFailure(f"registration must be refused when {label}")
        _require(
            sim.verifier.store.ta_servers_for_domain(TA_DOMAIN) == [],
            "refused registrations must leave no server rows",
        )
        return ScenarioReport(
            scenario=spec.name,
            outcome="prevented",
            detection_latency=None,
            notifications_delivered=_final_notification_count(sim),
            events=tuple(sim.events),
        )
    finally:
        sim.close()


def _evasion(spec: ScenarioSpec) -> ScenarioReport:
    sim = _Sim(spec, delay=FixedDelay(None))
    code_dir = Path(tempfile.mkdtemp(prefix="rawebs-evasion-"))
    handle = None
    try:
        cert = _enroll_and_activate(sim)
        for name, content in TA_CODE_V1.items():
            (code_dir / name).write_bytes(content)
        config = TaConfig(
            domain=TA_DOMAIN,
            verifier_url=VERIFIER_URL,
            ca_url=VERIFIER_URL,
            service_token=sim.token,
            repository="ta-code",
            commit_id="v1",
            code_dir=code_dir,
            state_dir=code_dir,
        )
        handle = ta_serve(config, sim.ta_key, cert, include_status_link=False)
        sim.record("ta", "serve", "operator deploys a page without the status link")
        page = sim.http.get(f"{handle.url}/").text
        _require("hello" in page, "the TA page must still serve its content")
        detected = "/app/verification-status" not in page
        _require(detected, "inspection must notice the missing status link")
        sim.record("harness", "page_inspection", "status link missing from served page")
        return ScenarioReport(
            scenario=spec.name,
            outcome="detected",
            detection_latency=0,
            notifications_delivered=_final_notification_count(sim),
            events=tuple(sim.events),
        )
    finally:
        if handle is not None:
            handle.stop()
        shutil.rmtree(code_dir, ignore_errors=True)
        sim.close()


def _impersonation_during_mmd(spec: ScenarioSpec) -> ScenarioReport:
    sim = _Sim(spec, delay=FixedDelay(None))
    try:
        _enroll_and_activate(sim)
        sim.subscribe("alice")
        sim.run_for(sim.rng.randrange(0, 2 * spec.poll_interval + 1))

        attack_time = sim.clock.now()
        adversary_key = KeyPair.generate()
        sim.issue_certificate("adversary", adversary_key)
        sim.record("adversary", "attack", "holds an SCT-bearing certificate users would accept")

        if spec.mmd >= 2 * spec.step:
            midpoint = attack_time + spec.mmd // 2
            collected = []
            while sim.clock.now() < midpoint:
                collected.extend(sim.tick())
            _require(not collected, "no violation may exist before the log publishes the entry")
            status = sim.status()
            _require(status.valid, "mid-window status must still read valid")
            _require(not status.violations, "mid-window status must show no violations")
            sim.record("user", "check_status", "mid-window verdict still valid: attack unseen")

        violations = sim.wait_for_violation(attack_time + spec.detection_bound + spec.step)
        window = violations[0].created_at - attack_time
        _require(window >= spec.mmd, "the undetected window must span the full merge delay")
        _require(
            window <= spec.detection_bound,
            f"window {window}s exceeded the {spec.detection_bound}s bound",
        )
        sim.record("harness", "window_measured", f"attack ran {window}s before detection")
        return ScenarioReport(
            scenario=spec.name,
            outcome="undetected_in_window",
            detection_latency=None,
            notifications_delivered=_final_notification_count(sim),
            events=tuple(sim.events),
            undetected_window=window,
        )
    finally:
        sim.close()


_RUNNERS = {
    "happy_path": _happy_path,
    "domain_impersonation": _domain_impersonation,
    "reregistration": _reregistration,
    "preexisting_cert": _preexisting_cert,
    "evidence_tamper": _evidence_tamper,
    "evasion": _evasion,
    "impersonation_during_mmd": _impersonation_during_mmd,
}


def run_scenario(spec: ScenarioSpec) -> ScenarioReport:
    """Run one scenario; raises ScenarioFailure on the first broken assertion."""
    return _RUNNERS[spec.name](spec)


def run_all(
    seed: int = 0,
    *,
    mmd: int = DEFAULT_MMD_SECONDS,
    monitor_lag: int = 0,
    poll_interval: int = DEFAULT_POLL_SECONDS,
    step: int = DEFAULT_STEP_SECONDS,
) -> list[ScenarioReport]:
    """Run the whole catalog with shared parameters.

    Raises an aggregated ScenarioFailure naming every failed scenario; the
    reports of the scenarios that passed ride along on the exception's
    ``reports`` attribute.
    """
    reports: list[ScenarioReport] = []
    failures: list[str] = []
    for name in SCENARIO_NAMES:
        spec = ScenarioSpec(
            name=name,
            mmd=mmd,
            monitor_lag=monitor_lag,
            poll_interval=poll_interval,
            seed=seed,
            step=step,
        )
        try:
            reports.append(run_scenario(spec))
        except ScenarioFailure as exc:
            failures.append(f"{name}: {exc}")
    if failures:
        error = ScenarioFailure("; ".join(failures))
        error.reports = reports
        raise error
    return reports
