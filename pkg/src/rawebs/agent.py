"""TA-side agent: provisioning client and a minimal attested web server.

``ta_provision`` drives the enrollment flow — key generation (or reuse),
measurement of the served code, evidence submission to the verifier, and
certificate acquisition from the CA — in that order, so a verifier rejection
never results in a certificate request. ``ta_serve`` runs the example TA
endpoint: a page that says hello, links to the verifier's status page, and
carries the TA certificate on every response so clients can check that the
served key matches the certified one.
"""

from __future__ import annotations

import base64
import html
import json
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional
from urllib.parse import urlsplit

import httpx

from .attestation import TeeRoot, build_and_measure, generate_evidence
from .model import Clock, Domain, KeyPair, ProtocolError, RealClock, canonicalize_domain
from .pki import Certificate

KEY_FILENAME = "key.pem"
CERT_FILENAME = "certificate.bin"


class ProvisioningRejected(ProtocolError):
    """The verifier refused the registration; no certificate was requested."""

    def __init__(self, status_code: int, detail: object):
        self.status_code = status_code
        self.detail = detail
        super().__init__(f"verifier rejected provisioning ({status_code}): {detail}")


class CaFailure(ProtocolError):
    """The CA did not return a usable certificate."""


class BindFailure(ProtocolError):
    """The certificate does not certify the key the server would use."""


def _require_url(value: str, name: str) -> str:
    parts = urlsplit(value)
    if parts.scheme not in ("http", "https") or not parts.netloc:
        raise ValueError(f"{name} must be an absolute http(s) URL, got {value!r}")
    return value.rstrip("/")


@dataclass(frozen=True)
class TaConfig:
    """Everything the agent needs to enroll and serve one TA."""

    domain: Domain
    verifier_url: str
    ca_url: str
    service_token: str
    repository: str
    commit_id: str
    code_dir: Path
    state_dir: Path

    def __post_init__(self) -> None:
        object.__setattr__(self, "domain", canonicalize_domain(self.domain))
        object.__setattr__(self, "verifier_url", _require_url(self.verifier_url, "verifier_url"))
        object.__setattr__(self, "ca_url", _require_url(self.ca_url, "ca_url"))
        object.__setattr__(self, "code_dir", Path(self.code_dir))
        object.__setattr__(self, "state_dir", Path(self.state_dir))
        if not self.code_dir.is_dir():
            raise ValueError(f"code_dir does not exist: {self.code_dir}")

    @classmethod
    def from_file(cls, path: Path | str) -> "TaConfig":
        raw = json.loads(Path(path).read_text())
        try:
            return cls(
                domain=raw["domain"],
                verifier_url=raw["verifier_url"],
                ca_url=raw["ca_url"],
                service_token=raw["service_token"],
                repository=raw["repository"],
                commit_id=raw.get("commit_id", ""),
                code_dir=raw["code_dir"],
                state_dir=raw["state_dir"],
            )
        except KeyError as exc:
            raise ValueError(f"config missing required field {exc.args[0]!r}") from exc

    @property
    def key_path(self) -> Path:
        return self.state_dir / KEY_FILENAME

    @property
    def cert_path(self) -> Path:
        return self.state_dir / CERT_FILENAME


def load_or_create_keypair(config: TaConfig) -> KeyPair:
    """Reuse the persisted key if one exists; otherwise generate and persist."""
    if config.key_path.is_file():
        return KeyPair.from_private_pem(config.key_path.read_bytes())
    keypair = KeyPair.generate()
    config.state_dir.mkdir(parents=True, exist_ok=True)
    config.key_path.write_bytes(keypair.private_pem())
    return keypair


def ta_provision(
    config: TaConfig,
    tee: TeeRoot,
    clock: Optional[Clock] = None,
    client: Optional[httpx.Client] = None,
) -> tuple[KeyPair, Certificate]:
    """Enroll the TA: register at the verifier, then obtain a certificate.

    Registration strictly precedes the CA call, so a rejected registration
    leaves no certificate behind. The keypair persists across runs; rerunning
    re-registers the same public key.
    """
    clock = clock or RealClock()
    owns_client = client is None
    client = client or httpx.Client(timeout=10.0)
    try:
        keypair = load_or_create_keypair(config)
        bundle, rv = build_and_measure(str(config.code_dir))
        evidence = generate_evidence(tee, rv, keypair.public_der, clock)

        response = client.post(
            f"{config.verifier_url}/api/ta",
            json={
                "repository": config.repository,
                "commit_id": config.commit_id,
                "domain": str(config.domain),
                "public_key": base64.b64encode(keypair.public_der).decode("ascii"),
                "evidence": evidence.to_base64(),
            },
            headers={"Authorization": f"Bearer {config.service_token}"},
        )
        if response.status_code != 201:
            try:
                detail = response.json().get("detail")
            except ValueError:
                detail = response.text
            raise ProvisioningRejected(response.status_code, detail)

        issue = client.post(
            f"{config.ca_url}/ca/issue",
            json={
                "domain": str(config.domain),
                "public_key": base64.b64encode(keypair.public_der).decode("ascii"),
            },
        )
        if issue.status_code != 200:
            raise CaFailure(f"CA returned {issue.status_code}: {issue.text}")
        try:
            cert = Certificate.decode(base64.b64decode(issue.json()["certificate"]))
        except (KeyError, ValueError) as exc:
            raise CaFailure(f"CA returned an undecodable certificate: {exc}") from exc
        if cert.public_key != keypair.public_der:
            raise CaFailure("CA certified a different public key")

        config.state_dir.mkdir(parents=True, exist_ok=True)
        config.cert_path.write_bytes(cert.encode())
        return keypair, cert
    finally:
        if owns_client:
            client.close()


@dataclass
class TaServerHandle:
    """A running TA server; ``url`` is its local address."""

    url: str
    _server: ThreadingHTTPServer = field(repr=False)
    _thread: threading.Thread = field(repr=False)

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=5)


def _render_page(status_url: Optional[str]) -> bytes:
    link = ""
    if status_url is not None:
        href = html.escape(status_url, quote=True)
        link = (
            f'<p><a href="{href}" target="_blank" '
            f'onclick="window.open(this.href); return false;">'
            f"Check verification status</a></p>"
        )
    return (
        "<!doctype html><html><head><title>TA</title></head>"
        f"<body><p>hello</p>{link}</body></html>"
    ).encode("utf-8")


def ta_serve(
    config: TaConfig,
    keypair: KeyPair,
    cert: Certificate,
    *,
    include_status_link: bool = True,
    host: str = "127.0.0.1",
    port: int = 0,
) -> TaServerHandle:
    """Serve the example TA page, binding the certificate to the given key.

    Every response carries ``X-Ta-Certificate`` (base64 of the certificate)
    so a client can compare the certified key against the registered one.
    """
    if cert.public_key != keypair.public_der:
        raise BindFailure("certificate public key does not match the serving key")
    if cert.domain != config.domain:
        raise BindFailure(
            f"certificate is for {cert.domain!r}, server is configured for {config.domain!r}"
        )

    cert_b64 = base64.b64encode(cert.encode()).decode("ascii")
    status_url = (
        f"{config.verifier_url}/app/verification-status" if include_status_link else None
    )
    page = _render_page(status_url)

    class Handler(BaseHTTPRequestHandler):
        def do_GET(self) -> None:  # noqa: N802 - http.server API
            body = page if self.path == "/" else b"not found"
            status = 200 if self.path == "/" else 404
            self.send_response(status)
            self.send_header("Content-Type", "text/html; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("X-Ta-Certificate", cert_b64)
            self.end_headers()
            self.wfile.write(body)

        def log_message(self, fmt: str, *args: object) -> None:
            pass

    try:
        server = ThreadingHTTPServer((host, port), Handler)
    except OSError as exc:
        raise BindFailure(f"cannot bind {host}:{port}: {exc}") from exc
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    actual_host, actual_port = server.server_address[:2]
    return TaServerHandle(url=f"http://{actual_host}:{actual_port}", _server=server, _thread=thread)
