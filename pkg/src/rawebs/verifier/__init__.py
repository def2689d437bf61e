from .service import (
    BuildFailed,
    EvidenceRejected,
    MalformedSubscription,
    NotFound,
    PreexistingCertificate,
    Unauthorized,
    Verifier,
)
from .store import ServiceAccount, Store, Subscription, TaCode, TaServer, TaViolation

__all__ = [
    "BuildFailed",
    "EvidenceRejected",
    "MalformedSubscription",
    "NotFound",
    "PreexistingCertificate",
    "ServiceAccount",
    "Store",
    "Subscription",
    "TaCode",
    "TaServer",
    "TaViolation",
    "Unauthorized",
    "Verifier",
]
