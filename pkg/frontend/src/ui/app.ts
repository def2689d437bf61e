/**
 * Page orchestration: resolve the TA domain from the referrer, render the
 * fetched status, wire the subscription button, and surface verified push
 * messages as alerts. All collaborators are injectable for tests; the boot
 * entry wires the real browser environment.
 */

import { ApiClient, type VerifierApi } from "./api.js";
import { DOMAIN_ERROR_MESSAGE, resolveTaDomain } from "./domain.js";
import { describePushPayload, importVerifierKey, verifyPushEnvelope } from "./push.js";
import {
  defaultEnvironment,
  setupSubscription,
  type SubscribeEnvironment,
  type SubscribeOutcome,
} from "./subscribe.js";
import {
  markSubscribed,
  renderDomainError,
  renderHeaderDomain,
  renderStatusResult,
  renderVerifierBanner,
  showAlert,
} from "./view.js";

export interface MessageSource {
  addEventListener(type: "message", listener: (event: MessageEvent) => void): void;
}

export interface AppOptions {
  api?: VerifierApi;
  environment?: SubscribeEnvironment;
  /** Where worker-forwarded push messages arrive; defaults to the service worker container. */
  messageSource?: MessageSource | null;
}

export interface AppHandle {
  /** Referrer-derived TA domain, or null when resolution failed. */
  readonly domain: string | null;
  /** Re-fetch and re-render the TA status. */
  refresh(): Promise<void>;
  /** Run the subscription flow, rendering the outcome. */
  subscribe(): Promise<SubscribeOutcome | null>;
  /** Verify and display one push message; true when it was displayed. */
  handlePushMessage(data: unknown): Promise<boolean>;
}

interface PushedMessage {
  type?: unknown;
  envelope?: unknown;
}

export async function startApp(doc: Document, options: AppOptions = {}): Promise<AppHandle> {
  const win = doc.defaultView;
  const api = options.api ?? new ApiClient("");

  renderVerifierBanner(doc, doc.location.host || doc.location.origin);

  const resolution = resolveTaDomain(doc.referrer);
  if (!resolution.ok) {
    renderDomainError(doc, DOMAIN_ERROR_MESSAGE);
    renderHeaderDomain(doc, null);
    return {
      domain: null,
      refresh: async () => {},
      subscribe: async () => null,
      handlePushMessage: async () => false,
    };
  }
  const domain = resolution.domain;
  renderHeaderDomain(doc, domain);

  const environment: SubscribeEnvironment =
    options.environment ??
    (() => {
      if (!win) throw new Error("document is not attached to a window");
      return defaultEnvironment(win, api, domain);
    })();

  let verifierKey: CryptoKey | null = null;
  let verifierKeyFetch: Promise<CryptoKey> | null = null;

  function pushKey(): Promise<CryptoKey> {
    if (verifierKey) return Promise.resolve(verifierKey);
    verifierKeyFetch ??= api
      .subscriptionConfig()
      .then((config) => importVerifierKey(config.public_key))
      .then((key) => {
        verifierKey = key;
        return key;
      })
      .catch((err) => {
        verifierKeyFetch = null;
        throw err;
      });
    return verifierKeyFetch;
  }

  async function refresh(): Promise<void> {
    const result = await api.fetchStatus(domain);
    renderStatusResult(doc, domain, result, () => {
      void refresh();
    });
  }

  async function subscribe(): Promise<SubscribeOutcome> {
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

  async function handlePushMessage(data: unknown): Promise<boolean> {
    const wrapped = data as PushedMessage | null;
    const envelope =
      wrapped && typeof wrapped === "object" && wrapped.type === "rawebs-push"
        ? wrapped.envelope
        : data;
    let key: CryptoKey;
    try {
      key = await pushKey();
    } catch {
      return false;
    }
    const payload = await verifyPushEnvelope(key, envelope);
    if (!payload) return false;
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

  const source: MessageSource | null =
    options.messageSource !== undefined
      ? options.messageSource
      : (((win?.navigator as Navigator | undefined)?.serviceWorker as MessageSource | undefined) ??
        null);
  source?.addEventListener("message", (event) => {
    void handlePushMessage(event.data);
  });

  await refresh();

  return { domain, refresh, subscribe, handlePushMessage };
}
