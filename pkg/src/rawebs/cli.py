"""Command-line entry points.

rawebs-sim       run attack/honest scenarios under simulated time and emit
                 structured reports (text to stdout or --report file, with
                 timeline/latency figures rendered next to a report file)
rawebs-verifier  run the verifier web service (with its in-process CA, log,
                 and monitor) from a JSON config
ta-agent         provision a TA against a running verifier and serve the
                 example attested page
"""

from __future__ import annotations

import argparse
import base64
import json
import sys
import threading
from pathlib import Path
from typing import Optional

from .agent import BindFailure, CaFailure, ProvisioningRejected, TaConfig
from .ctlog import DEFAULT_MMD_SECONDS
from .harness.report import render_figures, render_reports, write_report
from .harness.scenarios import (
    DEFAULT_POLL_SECONDS,
    DEFAULT_STEP_SECONDS,
    SCENARIO_NAMES,
    ScenarioFailure,
    ScenarioSpec,
    run_all,
    run_scenario,
)


def sim_main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="rawebs-sim",
        description="Replay attestation attack scenarios under a simulated clock.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one scenario, or 'all' for the whole catalog")
    run.add_argument(
        "--scenario",
        required=True,
        choices=SCENARIO_NAMES + ("all",),
        help="scenario name or 'all'",
    )
    run.add_argument("--mmd", type=int, default=DEFAULT_MMD_SECONDS, help="merge delay, seconds")
    run.add_argument("--poll", type=int, default=DEFAULT_POLL_SECONDS, help="monitor poll interval, seconds")
    run.add_argument("--lag", type=int, default=0, help="monitor visibility lag, seconds")
    run.add_argument("--seed", type=int, default=0, help="randomness seed")
    run.add_argument("--step", type=int, default=DEFAULT_STEP_SECONDS, help="simulated seconds per tick")
    run.add_argument("--report", type=Path, default=None, help="write the report here (figures go alongside)")
    args = parser.parse_args(argv)

    reports = []
    failure: Optional[ScenarioFailure] = None
    try:
        if args.scenario == "all":
            reports = run_all(
                seed=args.seed,
                mmd=args.mmd,
                monitor_lag=args.lag,
                poll_interval=args.poll,
                step=args.step,
            )
        else:
            spec = ScenarioSpec(
                name=args.scenario,
                mmd=args.mmd,
                monitor_lag=args.lag,
                poll_interval=args.poll,
                seed=args.seed,
                step=args.step,
            )
            reports = [run_scenario(spec)]
    except ScenarioFailure as exc:
        failure = exc
        reports = list(getattr(exc, "reports", []))

    if args.report is not None:
        write_report(reports, args.report)
        stem = args.report.with_suffix("") if args.report.suffix else args.report
        figures = render_figures(reports, stem)
        print(f"report written to {args.report}")
        for figure in figures:
            print(f"figure written to {figure}")
    else:
        sys.stdout.write(render_reports(reports))

    if failure is not None:
        print(f"scenario failure: {failure}", file=sys.stderr)
        return 1
    return 0


def _load_verifier_config(path: Path) -> dict:
    config = json.loads(path.read_text())
    missing = {"admin_credential"} - set(config)
    if missing:
        raise ValueError(f"verifier config missing: {sorted(missing)}")
    return config


def build_verifier_app(config: dict):
    """Assemble the full service stack (store, CA, log, monitor, verifier, app).

    Config keys:
      admin_credential (required)  bearer credential for admin endpoints
      store            sqlite path, default in-memory
      tee_id/tee_root_public_key   trust anchor; a fresh simulated root is
                                   generated when no key is given (its key is
                                   then printed for agents to use)
      mmd / monitor_lag / poll_interval   timing knobs, seconds
      log_id / ca_name             identities of the in-process log and CA
      push_key_pem     signing key for push messages (generated if absent)
      static_dir       overrides the bundled status-page assets
    """
    from .attestation import TeeRoot
    from .ctlog import CtLog, CtMonitor, FixedDelay
    from .model import KeyPair, RealClock
    from .pki import CertificateAuthority
    from .verifier import Store, Verifier
    from .verifier.notify import PushNotifier
    from .verifier.web import create_app

    clock = RealClock()
    log_key = KeyPair.generate()
    log = CtLog(
        log_id=config.get("log_id", "rawebs-log"),
        keypair=log_key,
        mmd=config.get("mmd", DEFAULT_MMD_SECONDS),
        delay=FixedDelay(config.get("merge_delay", 0)),
    )
    monitor = CtMonitor(log=log, lag=config.get("monitor_lag", 0))
    ca = CertificateAuthority(name=config.get("ca_name", "rawebs-ca"))

    if "tee_root_public_key" in config:
        anchors = {
            config.get("tee_id", "sim-tee"): base64.b64decode(config["tee_root_public_key"])
        }
        tee = None
    else:
        tee = TeeRoot(tee_id=config.get("tee_id", "sim-tee"), keypair=KeyPair.generate())
        anchors = {tee.tee_id: tee.public_der}

    if "push_key_pem" in config:
        push_key = KeyPair.from_private_pem(Path(config["push_key_pem"]).read_bytes())
    else:
        push_key = KeyPair.generate()

    verifier = Verifier(
        store=Store(config.get("store", ":memory:")),
        anchors=anchors,
        monitor=monitor,
        push_keypair=push_key,
        admin_credential=config["admin_credential"],
        clock=clock,
        notifier=PushNotifier(push_key),
        poll_interval=config.get("poll_interval", DEFAULT_POLL_SECONDS),
    )
    static_dir = Path(config["static_dir"]) if "static_dir" in config else None
    app = create_app(
        verifier, ca=ca, log=log, monitor=monitor, clock=clock, static_dir=static_dir
    )
    return app, verifier, tee


def verifier_main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="rawebs-verifier", description="Run the attestation verifier web service."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    serve = sub.add_parser("serve", help="serve the verifier API from a JSON config")
    serve.add_argument("--config", type=Path, required=True)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8800)
    args = parser.parse_args(argv)

    import uvicorn

    from .verifier.service import MonitorWorker

    config = _load_verifier_config(args.config)
    app, verifier, tee = build_verifier_app(config)
    if tee is not None:
        print(
            "generated simulated TEE root "
            f"{tee.tee_id}: {base64.b64encode(tee.public_der).decode()}"
        )
    worker = MonitorWorker(verifier).start()
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    finally:
        worker.stop()
    return 0


def agent_main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="ta-agent", description="Provision and serve a trusted application."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("provision", "register at the verifier and obtain a certificate"),
        ("serve", "serve the attested page (provisions first if needed)"),
    ):
        command = sub.add_parser(name, help=help_text)
        command.add_argument("--config", type=Path, required=True)
        if name == "serve":
            command.add_argument("--host", default="127.0.0.1")
            command.add_argument("--port", type=int, default=8801)
            command.add_argument(
                "--no-status-link",
                action="store_true",
                help="omit the verification-status link (used to demo evasion detection)",
            )
    args = parser.parse_args(argv)

    from .agent import load_or_create_keypair, ta_provision, ta_serve
    from .attestation import TeeRoot
    from .model import KeyPair
    from .pki import Certificate

    config = TaConfig.from_file(args.config)
    raw = json.loads(Path(args.config).read_text())
    tee_key_path = raw.get("tee_key_pem")
    if tee_key_path:
        tee = TeeRoot(
            tee_id=raw.get("tee_id", "sim-tee"),
            keypair=KeyPair.from_private_pem(Path(tee_key_path).read_bytes()),
        )
    else:
        tee = TeeRoot(tee_id=raw.get("tee_id", "sim-tee"), keypair=KeyPair.generate())
        print(
            "generated simulated TEE key (verifier must trust "
            f"{tee.tee_id}: {base64.b64encode(tee.public_der).decode()})"
        )

    try:
        if args.command == "provision":
            keypair, cert = ta_provision(config, tee)
            print(f"provisioned {config.domain}; certificate serial {cert.serial}")
            return 0

        if config.cert_path.is_file():
            keypair = load_or_create_keypair(config)
            cert = Certificate.decode(config.cert_path.read_bytes())
        else:
            keypair, cert = ta_provision(config, tee)
            print(f"provisioned {config.domain}; certificate serial {cert.serial}")
        handle = ta_serve(
            config,
            keypair,
            cert,
            include_status_link=not args.no_status_link,
            host=args.host,
            port=args.port,
        )
        print(f"serving {config.domain} at {handle.url} (Ctrl-C to stop)")
        try:
            threading.Event().wait()
        except KeyboardInterrupt:
            pass
        finally:
            handle.stop()
        return 0
    except (ProvisioningRejected, CaFailure, BindFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(sim_main())
