"""HTTP facade over the verifier core, plus optional in-process PKI routes.

The API surface is small and fixed: account registration, TA provisioning,
status lookup, subscription management, notification, and the static status
page. When the process also hosts the mock CA/log/monitor stack (the desk
deployment), /ca/issue and /monitor/certs are exposed from the same app so a
TA agent can complete the whole flow against one address.
"""

from __future__ import annotations

import base64
from pathlib import Path
from typing import Optional
from urllib.parse import urlsplit

from fastapi import FastAPI, Header, HTTPException, Request
from fastapi.responses import FileResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from ..ctlog import CtLog, CtMonitor
from ..model import Clock, Evidence, InvalidDomain, canonicalize_domain
from ..pki import CertificateAuthority
from .service import (
    BuildFailed,
    EvidenceRejected,
    MalformedSubscription,
    NotFound,
    PreexistingCertificate,
    Unauthorized,
    Verifier,
)

DEFAULT_STATIC_DIR = Path(__file__).parent / "static"


class ServiceRequest(BaseModel):
    name: str


class ProvisionRequest(BaseModel):
    repository: str
    commit_id: str
    domain: str
    public_key: str  # base64 DER
    evidence: str  # base64 wire encoding


class SubscriptionKeys(BaseModel):
    p256dh: str
    auth: str


class SubscriptionRequest(BaseModel):
    endpoint: str
    keys: SubscriptionKeys


class NotifyRequest(BaseModel):
    message: str


class IssueRequest(BaseModel):
    domain: str
    public_key: str  # base64 DER


def _bearer(authorization: Optional[str]) -> str:
    if not authorization or not authorization.startswith("Bearer "):
        raise HTTPException(status_code=401, detail="missing bearer credential")
    return authorization[len("Bearer ") :]


def _referer_domain(request: Request) -> str:
    referer = request.headers.get("referer")
    if not referer:
        raise HTTPException(status_code=400, detail="cannot determine TA domain")
    host = urlsplit(referer).hostname
    if not host:
        raise HTTPException(status_code=400, detail="cannot determine TA domain")
    try:
        return canonicalize_domain(host)
    except InvalidDomain as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


def create_app(
    verifier: Verifier,
    *,
    ca: Optional[CertificateAuthority] = None,
    log: Optional[CtLog] = None,
    monitor: Optional[CtMonitor] = None,
    clock: Optional[Clock] = None,
    static_dir: Optional[Path] = None,
) -> FastAPI:
    app = FastAPI(title="rawebs verifier", docs_url=None, redoc_url=None)
    static_root = Path(static_dir) if static_dir else DEFAULT_STATIC_DIR
    pki_clock = clock or verifier.clock

    @app.post("/api/service", status_code=201)
    def register_service(body: ServiceRequest, authorization: Optional[str] = Header(None)):
        try:
            account = verifier.register_service(_bearer(authorization), body.name)
        except Unauthorized as exc:
            raise HTTPException(status_code=401, detail=str(exc)) from exc
        return {"id": account.id, "token": account.token}

    @app.post("/api/ta", status_code=201)
    def provision_ta(body: ProvisionRequest, authorization: Optional[str] = Header(None)):
        token = _bearer(authorization)
        try:
            public_der = base64.b64decode(body.public_key, validate=True)
            evidence = Evidence.from_base64(body.evidence)
        except (ValueError, TypeError) as exc:
            raise HTTPException(status_code=422, detail=f"malformed request: {exc}") from exc
        try:
            server = verifier.provision_ta(
                token, body.repository, body.commit_id, body.domain, public_der, evidence
            )
        except Unauthorized as exc:
            raise HTTPException(status_code=401, detail=str(exc)) from exc
        except PreexistingCertificate as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except EvidenceRejected as exc:
            raise HTTPException(
                status_code=422, detail={"error": "evidence_rejected", "reason": exc.reason.value}
            ) from exc
        except BuildFailed as exc:
            raise HTTPException(status_code=422, detail={"error": "build_failed", "message": str(exc)}) from exc
        except InvalidDomain as exc:
            raise HTTPException(status_code=422, detail={"error": "invalid_domain", "message": str(exc)}) from exc
        return {
            "id": server.id,
            "domain": server.domain,
            "is_active": server.is_active,
            "created_at": server.created_at,
            "service": server.service,
            "code": server.code,
        }

    @app.get("/api/ta/{domain}")
    def ta_status(domain: str):
        try:
            return verifier.get_ta_status(domain).as_dict()
        except NotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except InvalidDomain as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    @app.get("/api/config/subscription")
    def subscription_config():
        return verifier.get_subscription_config()

    @app.post("/api/subscription", status_code=201)
    def subscribe(body: SubscriptionRequest, request: Request):
        domain = _referer_domain(request)
        try:
            sub = verifier.subscribe(domain, body.endpoint, body.keys.p256dh, body.keys.auth)
        except NotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except MalformedSubscription as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return {
            "id": sub.id,
            "endpoint": sub.endpoint,
            "keys": {"p256dh": sub.p256dh, "auth": sub.auth},
            "server": sub.server,
        }

    @app.post("/api/notify")
    def notify(body: NotifyRequest, authorization: Optional[str] = Header(None)):
        try:
            report = verifier.notify_broadcast(_bearer(authorization), body.message)
        except Unauthorized as exc:
            raise HTTPException(status_code=401, detail=str(exc)) from exc
        return report.as_dict()

    @app.get("/app/verification-status")
    def verification_status_page():
        index = static_root / "index.html"
        if not index.is_file():
            raise HTTPException(status_code=404, detail="status page assets not built")
        return FileResponse(index, media_type="text/html")

    if static_root.is_dir():
        app.mount("/static", StaticFiles(directory=static_root), name="static")

    if ca is not None and log is not None:

        @app.post("/ca/issue")
        def ca_issue(body: IssueRequest):
            try:
                public_der = base64.b64decode(body.public_key, validate=True)
                precert = ca.issue_precertificate(body.domain, public_der, pki_clock)
            except (ValueError, InvalidDomain) as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            sct = log.append(precert, pki_clock)
            cert = ca.finalize_certificate(precert, [sct])
            return {"certificate": base64.b64encode(cert.encode()).decode("ascii")}

    if monitor is not None:

        @app.get("/monitor/certs", response_class=PlainTextResponse)
        def monitor_certs(domain: str):
            try:
                canonical = canonicalize_domain(domain)
            except InvalidDomain as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
            lines = []
            for entry in monitor.query(canonical, pki_clock):
                pk_b64 = base64.b64encode(entry.precert.public_key).decode("ascii")
                lines.append(
                    f"{entry.index}\t{entry.precert.serial}\t{entry.precert.domain}"
                    f"\t{pk_b64}\t{entry.publish_time}"
                )
            return "\n".join(lines) + ("\n" if lines else "")

    return app
