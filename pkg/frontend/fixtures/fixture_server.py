"""Live verifier fixture for the frontend integration tests.

Serves the real verifier app (API, status page, static assets) on localhost
with two pre-provisioned TAs:

  - ta.example.com   registered, CT-confirmed, no violations  -> valid
  - bad.example.com  registered, CT-confirmed, one violation  -> invalid

Test-only routes (not part of the product surface):

  GET  /fixture/subscription-count?domain=...   -> {"count": n}
  POST /fixture/trigger-violation?domain=...    -> issues a certificate for a
        foreign key, runs one monitoring step, and returns the violations and
        push deliveries that produced.
"""

import argparse

import uvicorn

from rawebs.attestation import TeeRoot, compute_reference_value, generate_evidence
from rawebs.ctlog import CtLog, CtMonitor, ZeroDelay
from rawebs.model import CodeBundle, KeyPair, SimulatedClock
from rawebs.pki import CertificateAuthority
from rawebs.verifier import Store, Verifier
from rawebs.verifier.web import create_app

ADMIN = "fixture-admin"


def build_app():
    clock = SimulatedClock(start=1_000_000)
    tee = TeeRoot(tee_id="fixture-tee", keypair=KeyPair.generate())
    log = CtLog(log_id="fixture-log", keypair=KeyPair.generate(), delay=ZeroDelay())
    monitor = CtMonitor(log=log)
    ca = CertificateAuthority(name="fixture-ca")
    bundles = {}
    store = Store(":memory:")
    verifier = Verifier(
        store=store,
        anchors={tee.tee_id: tee.public_der},
        monitor=monitor,
        push_keypair=KeyPair.generate(),
        admin_credential=ADMIN,
        clock=clock,
        builder=lambda repo, commit: (bundles[repo], compute_reference_value(bundles[repo])),
    )
    app = create_app(verifier, ca=ca, log=log, monitor=monitor, clock=clock)

    token = verifier.register_service(ADMIN, "fixture-service").token

    def enroll(domain: str, repo: str) -> None:
        keypair = KeyPair.generate()
        bundles[repo] = CodeBundle(files={"app.py": f"serve {domain}".encode()}, origin=repo)
        evidence = generate_evidence(
            tee, compute_reference_value(bundles[repo]), keypair.public_der, clock
        )
        verifier.provision_ta(token, repo, "c1", domain, keypair.public_der, evidence)
        precert = ca.issue_precertificate(domain, keypair.public_der, clock)
        sct = log.append(precert, clock)
        ca.finalize_certificate(precert, [sct])
        clock.advance(1)
        verifier.monitoring_step()

    def force_violation(domain: str) -> dict:
        foreign = KeyPair.generate()
        precert = ca.issue_precertificate(domain, foreign.public_der, clock)
        log.append(precert, clock)
        clock.advance(1)
        violations = verifier.monitoring_step()
        return {
            "violations": [
                {"id": v.id, "offending_log_index": v.offending_log_index} for v in violations
            ]
        }

    enroll("ta.example.com", "repo-ta")
    enroll("bad.example.com", "repo-bad")
    force_violation("bad.example.com")

    @app.get("/fixture/subscription-count")
    def subscription_count(domain: str):
        server = store.latest_ta_server(domain)
        if server is None:
            return {"count": 0}
        return {"count": len(store.subscriptions_for_server(server.id))}

    @app.post("/fixture/trigger-violation")
    def trigger_violation(domain: str):
        return force_violation(domain)

    return app


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--port", type=int, required=True)
    args = parser.parse_args()
    uvicorn.run(build_app(), host="127.0.0.1", port=args.port, log_level="warning")


if __name__ == "__main__":
    main()
