/**
 * Page orchestration: resolve the TA domain from the referrer, render the
 * fetched status, wire the subscription button, and surface verified push
 * messages as alerts. All collaborators are injectable for tests; the boot
 * entry wires the real browser environment.
 */
import { ApiClient } from "./api.js";
import { DOMAIN_ERROR_MESSAGE, resolveTaDomain } from "./domain.js";
import { describePushPayload, importVerifierKey, verifyPushEnvelope } from "./push.js";
import { defaultEnvironment, setupSubscription, } from "./subscribe.js";
import { markSubscribed, renderDomainError, renderHeaderDomain, renderStatusResult, renderVerifierBanner, showAlert, } from "./view.js";
export async function startApp(doc, options = {}) {
    const win = doc.defaultView;
    const api = options.api ?? new ApiClient("");
    renderVerifierBanner(doc, doc.location.host || doc.location.origin);
    const resolution = resolveTaDomain(doc.referrer);
    if (!resolution.ok) {
        renderDomainError(doc, DOMAIN_ERROR_MESSAGE);
        renderHeaderDomain(doc, null);
        return {
            domain: null,
            refresh: async () => { },
            subscribe: async () => null,
            handlePushMessage: async () => false,
        };
    }
    const domain = resolution.domain;
    renderHeaderDomain(doc, domain);
    const environment = options.environment ??
        (() => {
            if (!win)
                throw new Error("document is not attached to a window");
            return defaultEnvironment(win, api, domain);
        })();
    let verifierKey = null;
    let verifierKeyFetch = null;
    function pushKey() {
        if (verifierKey)
            return Promise.resolve(verifierKey);
        verifierKeyFetch ?? (verifierKeyFetch = api
            .subscriptionConfig()
            .then((config) => importVerifierKey(config.public_key))
            .then((key) => {
            verifierKey = key;
            return key;
        })
            .catch((err) => {
            verifierKeyFetch = null;
            throw err;
        }));
        return verifierKeyFetch;
    }
    async function refresh() {
        const result = await api.fetchStatus(domain);
        renderStatusResult(doc, domain, result, () => {
            void refresh();
        });
    }
    async function subscribe() {
        const outcome = await setupSubscription(environment);
        switch (outcome.kind) {
            case "subscribed":
                verifierKey = outcome.verifierKey;
                markSubscribed(doc);
                showAlert(doc, "Subscribed", `you will be alerted about violations for ${domain}.`, "notice");
                break;
            case "permission-denied":
                showAlert(doc, "Notifications required", outcome.explanation, "notice");
                break;
            case "failed":
                showAlert(doc, "Subscription failed", outcome.message, "notice");
                break;
        }
        return outcome;
    }
    async function handlePushMessage(data) {
        const wrapped = data;
        const envelope = wrapped && typeof wrapped === "object" && wrapped.type === "rawebs-push"
            ? wrapped.envelope
            : data;
        let key;
        try {
            key = await pushKey();
        }
        catch {
            return false;
        }
        const payload = await verifyPushEnvelope(key, envelope);
        if (!payload)
            return false;
        const { title, body } = describePushPayload(payload);
        showAlert(doc, title, body, "alert");
        if (payload.kind !== "broadcast" && payload.domain === domain) {
            await refresh();
        }
        return true;
    }
    doc.getElementById("subscribe-button")?.addEventListener("click", () => {
        void subscribe();
    });
    const source = options.messageSource !== undefined
        ? options.messageSource
        : (win?.navigator?.serviceWorker ??
            null);
    source?.addEventListener("message", (event) => {
        void handlePushMessage(event.data);
    });
    await refresh();
    return { domain, refresh, subscribe, handlePushMessage };
}
