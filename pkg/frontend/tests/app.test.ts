import { createSign, generateKeyPairSync } from "node:crypto";
import { JSDOM } from "jsdom";
import { describe, expect, it, vi } from "vitest";

import { ApiClient, type TaStatusResponse } from "../src/ui/api.js";
import { startApp, type MessageSource } from "../src/ui/app.js";
import { canonicalJson } from "../src/ui/canonical.js";
import type { SubscribeEnvironment } from "../src/ui/subscribe.js";

const KEYS = generateKeyPairSync("rsa", { modulusLength: 2048 });
const PUBLIC_KEY_B64 = KEYS.publicKey.export({ type: "spki", format: "der" }).toString("base64");

function signedEnvelope(payload: Record<string, unknown>) {
  const signer = createSign("RSA-SHA256");
  signer.update(canonicalJson(payload));
  return { payload, signature: signer.sign(KEYS.privateKey).toString("base64") };
}

const SHELL = `<!DOCTYPE html><html><body><main id="app">
  <aside id="verifier-banner" hidden></aside>
  <h1>TA Verification Status <span id="header-domain"></span></h1>
  <section id="verdict" data-state="loading">Checking…</section>
  <dl id="details" hidden>
    <dd id="field-domain"></dd><dd id="field-rv"></dd><dd id="field-repository"></dd>
    <dd id="field-commit"></dd><dd id="field-registered"></dd>
  </dl>
  <section id="violations" hidden><table><tbody id="violation-rows"></tbody></table></section>
  <button id="subscribe-button" hidden></button>
  <section id="alerts"></section>
</main></body></html>`;

function taStatus(overrides: Partial<TaStatusResponse> = {}): TaStatusResponse {
  return {
    domain: "ta.example.com",
    valid: true,
    activated: true,
    rv: "1f".repeat(32),
    repository: "https://git.example.com/shop",
    commit_id: "a3f5",
    registered_at: 1_700_000_000,
    violations: [],
    ...overrides,
  };
}

interface FakeBackend {
  fetchLog: string[];
  subscribePosts: Array<{ referrer: string | undefined; body: unknown }>;
  statuses: Map<string, TaStatusResponse>;
}

function fakeFetch(backend: FakeBackend): (input: string, init?: RequestInit) => Promise<Response> {
  return async (input, init) => {
    backend.fetchLog.push(input);
    const url = new URL(input, "http://fake.test");
    if (url.pathname.startsWith("/api/ta/")) {
      const domain = decodeURIComponent(url.pathname.slice("/api/ta/".length));
      const status = backend.statuses.get(domain);
      if (!status) {
        return new Response(JSON.stringify({ detail: "unknown TA domain" }), { status: 404 });
      }
      return new Response(JSON.stringify(status), { status: 200 });
    }
    if (url.pathname === "/api/config/subscription") {
      return new Response(JSON.stringify({ public_key: PUBLIC_KEY_B64 }), { status: 200 });
    }
    if (url.pathname === "/api/subscription") {
      const headers = new Headers(init?.headers);
      backend.subscribePosts.push({
        referrer: headers.get("referer") ?? undefined,
        body: JSON.parse(String(init?.body)),
      });
      return new Response(JSON.stringify({ id: backend.subscribePosts.length }), { status: 201 });
    }
    return new Response("not found", { status: 404 });
  };
}

function makePage(referrer: string, url = "http://verifier.test/app/verification-status") {
  return new JSDOM(SHELL, { url, referrer: referrer || undefined }).window.document;
}

function makeBackend(): FakeBackend {
  return {
    fetchLog: [],
    subscribePosts: [],
    statuses: new Map([["ta.example.com", taStatus()]]),
  };
}

function makeEnvironment(api: ApiClient, overrides: Partial<SubscribeEnvironment> = {}): SubscribeEnvironment {
  const store = new Map<string, string>();
  return {
    api,
    domain: "ta.example.com",
    referrer: "https://ta.example.com/welcome",
    origin: "http://verifier.test",
    storage: {
      getItem: (k: string) => store.get(k) ?? null,
      setItem: (k: string, v: string) => void store.set(k, v),
    },
    requestPermission: async () => "granted",
    registerWorker: async () => null,
    pushSubscription: async () => null,
    randomBytes: (n) => crypto.getRandomValues(new Uint8Array(n)),
    ...overrides,
  };
}

describe("startApp domain handling", () => {
  it("derives the domain from the referrer and ignores a hostile ?domain=", async () => {
    const backend = makeBackend();
    backend.statuses.set(
      "evil.example.com",
      taStatus({
        domain: "evil.example.com",
        valid: false,
        violations: [{ id: 9, created_at: 1, offending_log_index: 0 }],
      }),
    );
    const doc = makePage(
      "https://ta.example.com/welcome",
      "http://verifier.test/app/verification-status?domain=evil.example.com",
    );
    const api = new ApiClient("", fakeFetch(backend));
    const handle = await startApp(doc, {
      api,
      environment: makeEnvironment(api),
      messageSource: null,
    });

    expect(handle.domain).toBe("ta.example.com");
    expect(backend.fetchLog).toEqual(["/api/ta/ta.example.com"]);
    expect((doc.getElementById("verdict") as HTMLElement).dataset.state).toBe("valid");
    expect(doc.getElementById("header-domain")?.textContent).toContain("ta.example.com");
    expect(doc.body.textContent).not.toContain("evil.example.com");
  });

  it("fails closed without a referrer: error state, no API call", async () => {
    const backend = makeBackend();
    const doc = makePage("");
    const api = new ApiClient("", fakeFetch(backend));
    const handle = await startApp(doc, { api, messageSource: null });

    expect(handle.domain).toBeNull();
    expect(backend.fetchLog).toEqual([]);
    const verdict = doc.getElementById("verdict") as HTMLElement;
    expect(verdict.dataset.state).toBe("error");
    expect(verdict.textContent).toContain("cannot determine TA domain");
  });

  it("shows the verifier-host banner", async () => {
    const backend = makeBackend();
    const doc = makePage("https://ta.example.com/");
    const api = new ApiClient("", fakeFetch(backend));
    await startApp(doc, { api, environment: makeEnvironment(api), messageSource: null });
    const banner = doc.getElementById("verifier-banner") as HTMLElement;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain("verifier.test");
  });
});

describe("startApp verdict rendering", () => {
  it("renders invalid exactly when the API flag is false", async () => {
    const backend = makeBackend();
    backend.statuses.set(
      "ta.example.com",
      taStatus({ valid: false, violations: [{ id: 3, created_at: 7, offending_log_index: 2 }] }),
    );
    const doc = makePage("https://ta.example.com/");
    const api = new ApiClient("", fakeFetch(backend));
    await startApp(doc, { api, environment: makeEnvironment(api), messageSource: null });
    expect((doc.getElementById("verdict") as HTMLElement).dataset.state).toBe("invalid");
    expect(doc.querySelectorAll("#violation-rows tr").length).toBe(1);
  });

  it("renders the unregistered warning on 404", async () => {
    const backend = makeBackend();
    backend.statuses.delete("ta.example.com");
    const doc = makePage("https://ta.example.com/");
    const api = new ApiClient("", fakeFetch(backend));
    await startApp(doc, { api, environment: makeEnvironment(api), messageSource: null });
    expect((doc.getElementById("verdict") as HTMLElement).dataset.state).toBe("unregistered");
  });

  it("refresh() re-fetches and re-renders", async () => {
    const backend = makeBackend();
    const doc = makePage("https://ta.example.com/");
    const api = new ApiClient("", fakeFetch(backend));
    const handle = await startApp(doc, { api, environment: makeEnvironment(api), messageSource: null });
    backend.statuses.set(
      "ta.example.com",
      taStatus({ valid: false, violations: [{ id: 1, created_at: 2, offending_log_index: 3 }] }),
    );
    await handle.refresh();
    expect((doc.getElementById("verdict") as HTMLElement).dataset.state).toBe("invalid");
    expect(backend.fetchLog.filter((u) => u.includes("/api/ta/")).length).toBe(2);
  });
});

describe("startApp subscription", () => {
  it("subscribes through the button and posts the TA referrer context", async () => {
    const backend = makeBackend();
    const doc = makePage("https://ta.example.com/welcome");
    const api = new ApiClient("", fakeFetch(backend));
    await startApp(doc, { api, environment: makeEnvironment(api), messageSource: null });

    const button = doc.getElementById("subscribe-button") as HTMLButtonElement;
    expect(button.hidden).toBe(false);
    button.click();
    await vi.waitFor(() => {
      expect(button.disabled).toBe(true);
    });

    expect(backend.subscribePosts.length).toBe(1);
    expect(backend.subscribePosts[0]!.referrer).toBe("https://ta.example.com/welcome");
    expect(doc.querySelector("#alerts .notice")?.textContent).toContain("Subscribed");
  });

  it("explains the permission requirement when denied", async () => {
    const backend = makeBackend();
    const doc = makePage("https://ta.example.com/");
    const api = new ApiClient("", fakeFetch(backend));
    const handle = await startApp(doc, {
      api,
      environment: makeEnvironment(api, { requestPermission: async () => "denied" }),
      messageSource: null,
    });
    const outcome = await handle.subscribe();
    expect(outcome?.kind).toBe("permission-denied");
    expect(backend.subscribePosts.length).toBe(0);
    expect(doc.querySelector("#alerts .notice")?.textContent).toMatch(/[Nn]otifications are required/);
  });
});

describe("startApp push handling", () => {
  it("displays a verified violation push and refreshes the verdict", async () => {
    const backend = makeBackend();
    const doc = makePage("https://ta.example.com/");
    const api = new ApiClient("", fakeFetch(backend));
    const handle = await startApp(doc, { api, environment: makeEnvironment(api), messageSource: null });

    backend.statuses.set(
      "ta.example.com",
      taStatus({ valid: false, violations: [{ id: 3, created_at: 1000600, offending_log_index: 7 }] }),
    );
    const envelope = signedEnvelope({
      kind: "violation",
      domain: "ta.example.com",
      violation_id: 3,
      created_at: 1000600,
      offending_log_index: 7,
    });

    const displayed = await handle.handlePushMessage(envelope);
    expect(displayed).toBe(true);
    const alert = doc.querySelector("#alerts .alert") as HTMLElement;
    expect(alert.textContent).toContain("ta.example.com");
    expect(alert.textContent).toContain("#3");
    expect((doc.getElementById("verdict") as HTMLElement).dataset.state).toBe("invalid");
  });

  it("discards a tampered push without displaying anything", async () => {
    const backend = makeBackend();
    const doc = makePage("https://ta.example.com/");
    const api = new ApiClient("", fakeFetch(backend));
    const handle = await startApp(doc, { api, environment: makeEnvironment(api), messageSource: null });

    const envelope = signedEnvelope({
      kind: "violation",
      domain: "ta.example.com",
      violation_id: 3,
      created_at: 1000600,
      offending_log_index: 7,
    });
    envelope.payload = { ...envelope.payload, domain: "evil.example.com" };

    expect(await handle.handlePushMessage(envelope)).toBe(false);
    expect(doc.querySelector("#alerts .alert")).toBeNull();
  });

  it("accepts worker-wrapped messages from the message source", async () => {
    const backend = makeBackend();
    const doc = makePage("https://ta.example.com/");
    const api = new ApiClient("", fakeFetch(backend));
    let listener: ((event: MessageEvent) => void) | null = null;
    const source: MessageSource = {
      addEventListener: (_type, cb) => {
        listener = cb;
      },
    };
    await startApp(doc, { api, environment: makeEnvironment(api), messageSource: source });

    const envelope = signedEnvelope({ kind: "broadcast", message: "maintenance tonight" });
    expect(listener).not.toBeNull();
    listener!({ data: { type: "rawebs-push", envelope } } as MessageEvent);
    await vi.waitFor(() => {
      expect(doc.querySelector("#alerts .alert")?.textContent).toContain("maintenance tonight");
    });
  });

  it("does not refresh the page verdict for another TA's violation", async () => {
    const backend = makeBackend();
    const doc = makePage("https://ta.example.com/");
    const api = new ApiClient("", fakeFetch(backend));
    const handle = await startApp(doc, { api, environment: makeEnvironment(api), messageSource: null });
    const before = backend.fetchLog.filter((u) => u.includes("/api/ta/")).length;

    const envelope = signedEnvelope({
      kind: "violation",
      domain: "other.example.com",
      violation_id: 1,
      created_at: 5,
      offending_log_index: 0,
    });
    expect(await handle.handlePushMessage(envelope)).toBe(true);
    expect(backend.fetchLog.filter((u) => u.includes("/api/ta/")).length).toBe(before);
    expect((doc.getElementById("verdict") as HTMLElement).dataset.state).toBe("valid");
  });
});
