import { readFileSync } from "node:fs";
import { JSDOM } from "jsdom";
import { repoFile } from "./paths.js";
import { describe, expect, it, vi } from "vitest";

import type { TaStatusResponse } from "../src/ui/api.js";
import {
  markSubscribed,
  renderDomainError,
  renderHeaderDomain,
  renderStatusResult,
  renderVerifierBanner,
  setVerdict,
  showAlert,
} from "../src/ui/view.js";

// The page shell the verifier actually serves — rendering is tested against
// the real asset so the element contract cannot drift silently.
const SHELL_HTML = readFileSync(repoFile("src/rawebs/verifier/static/index.html"), "utf-8");

function freshDocument(): Document {
  return new JSDOM(SHELL_HTML).window.document;
}

function status(overrides: Partial<TaStatusResponse> = {}): TaStatusResponse {
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

describe("page shell", () => {
  it("contains every element the renderer writes to", () => {
    const doc = freshDocument();
    for (const id of [
      "verifier-banner",
      "header-domain",
      "verdict",
      "details",
      "field-domain",
      "field-rv",
      "field-repository",
      "field-commit",
      "field-registered",
      "violations",
      "violation-rows",
      "subscribe-button",
      "alerts",
    ]) {
      expect(doc.getElementById(id), `#${id}`).not.toBeNull();
    }
  });

  it("marks the alert region as a live region", () => {
    const doc = freshDocument();
    expect(doc.getElementById("alerts")?.getAttribute("aria-live")).toBe("assertive");
  });
});

describe("renderVerifierBanner", () => {
  it("names the expected verifier host and becomes visible", () => {
    const doc = freshDocument();
    renderVerifierBanner(doc, "verifier.example:8800");
    const banner = doc.getElementById("verifier-banner") as HTMLElement;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain("verifier.example:8800");
    expect(banner.textContent).toContain("address bar");
  });
});

describe("renderStatusResult", () => {
  it("renders a valid TA with details and repository link", () => {
    const doc = freshDocument();
    const s = status();
    renderHeaderDomain(doc, s.domain);
    renderStatusResult(doc, s.domain, { kind: "ok", status: s }, () => {});

    const verdict = doc.getElementById("verdict") as HTMLElement;
    expect(verdict.dataset.state).toBe("valid");
    expect(verdict.textContent).toContain("ta.example.com");

    expect((doc.getElementById("details") as HTMLElement).hidden).toBe(false);
    expect(doc.getElementById("field-domain")?.textContent).toBe("ta.example.com");
    expect(doc.getElementById("field-rv")?.textContent).toBe("1f".repeat(32));
    const link = doc.querySelector("#field-repository a") as HTMLAnchorElement;
    expect(link.href).toBe("https://git.example.com/shop");
    expect(doc.getElementById("field-commit")?.textContent).toBe("a3f5");
    expect(doc.getElementById("field-registered")?.textContent).toContain("1700000000");

    expect((doc.getElementById("violations") as HTMLElement).hidden).toBe(true);
    expect((doc.getElementById("subscribe-button") as HTMLElement).hidden).toBe(false);
    expect(doc.getElementById("header-domain")?.textContent).toContain("ta.example.com");
  });

  it("renders an invalid TA with one violation row per record", () => {
    const doc = freshDocument();
    const s = status({
      valid: false,
      violations: [
        { id: 1, created_at: 1_700_000_600, offending_log_index: 4 },
        { id: 2, created_at: 1_700_000_900, offending_log_index: 9 },
      ],
    });
    renderStatusResult(doc, s.domain, { kind: "ok", status: s }, () => {});

    expect((doc.getElementById("verdict") as HTMLElement).dataset.state).toBe("invalid");
    expect(doc.getElementById("verdict")?.textContent).toContain("2 violations");
    expect((doc.getElementById("violations") as HTMLElement).hidden).toBe(false);
    const rows = doc.querySelectorAll("#violation-rows tr");
    expect(rows.length).toBe(2);
    const cells = Array.from(rows[1]!.querySelectorAll("td"), (td) => td.textContent);
    expect(cells).toEqual(["2", "1700000900", "9"]);
  });

  it("renders a registered-but-unconfirmed TA as pending, not valid", () => {
    const doc = freshDocument();
    const s = status({ valid: false, activated: false });
    renderStatusResult(doc, s.domain, { kind: "ok", status: s }, () => {});
    const verdict = doc.getElementById("verdict") as HTMLElement;
    expect(verdict.dataset.state).toBe("pending");
    expect(verdict.textContent).not.toMatch(/^Valid/);
  });

  it("shows the verdict as valid exactly when the API flag is true", () => {
    for (const valid of [true, false]) {
      for (const activated of [true, false]) {
        for (const violations of [
          [],
          [{ id: 1, created_at: 5, offending_log_index: 0 }],
        ]) {
          const doc = freshDocument();
          const s = status({ valid, activated, violations });
          renderStatusResult(doc, s.domain, { kind: "ok", status: s }, () => {});
          const state = (doc.getElementById("verdict") as HTMLElement).dataset.state;
          expect(state === "valid").toBe(valid);
        }
      }
    }
  });

  it("renders a non-URL repository as plain text", () => {
    const doc = freshDocument();
    const s = status({ repository: "git@internal:shop.git" });
    renderStatusResult(doc, s.domain, { kind: "ok", status: s }, () => {});
    expect(doc.querySelector("#field-repository a")).toBeNull();
    expect(doc.getElementById("field-repository")?.textContent).toBe("git@internal:shop.git");
  });

  it("renders an unregistered domain as a warning and hides everything else", () => {
    const doc = freshDocument();
    renderStatusResult(doc, "ghost.example.com", { kind: "unregistered" }, () => {});
    const verdict = doc.getElementById("verdict") as HTMLElement;
    expect(verdict.dataset.state).toBe("unregistered");
    expect(verdict.textContent).toContain("ghost.example.com");
    expect((doc.getElementById("details") as HTMLElement).hidden).toBe(true);
    expect((doc.getElementById("subscribe-button") as HTMLElement).hidden).toBe(true);
  });

  it("renders a network failure as a retryable error", () => {
    const doc = freshDocument();
    const onRetry = vi.fn();
    renderStatusResult(
      doc,
      "ta.example.com",
      { kind: "network-error", message: "connection refused" },
      onRetry,
    );
    const verdict = doc.getElementById("verdict") as HTMLElement;
    expect(verdict.dataset.state).toBe("error");
    expect(verdict.textContent).toContain("connection refused");
    const retry = doc.getElementById("retry-button") as HTMLButtonElement;
    retry.dispatchEvent(new (doc.defaultView as Window & typeof globalThis).Event("click"));
    expect(onRetry).toHaveBeenCalledTimes(1);
  });

  it("clears stale violation rows when re-rendering", () => {
    const doc = freshDocument();
    const bad = status({
      valid: false,
      violations: [{ id: 7, created_at: 1, offending_log_index: 2 }],
    });
    renderStatusResult(doc, bad.domain, { kind: "ok", status: bad }, () => {});
    renderStatusResult(doc, bad.domain, { kind: "ok", status: status() }, () => {});
    expect(doc.querySelectorAll("#violation-rows tr").length).toBe(0);
    expect((doc.getElementById("violations") as HTMLElement).hidden).toBe(true);
  });
});

describe("alerts and state helpers", () => {
  it("appends a visible alert with role=alert", () => {
    const doc = freshDocument();
    showAlert(doc, "Violation detected for ta.example.com", "violation #3", "alert");
    const alert = doc.querySelector("#alerts .alert") as HTMLElement;
    expect(alert.getAttribute("role")).toBe("alert");
    expect(alert.hidden).toBe(false);
    expect(alert.textContent).toContain("Violation detected for ta.example.com");
    expect(alert.textContent).toContain("violation #3");
  });

  it("appends notices with role=status", () => {
    const doc = freshDocument();
    showAlert(doc, "Subscribed", "you will be alerted", "notice");
    const notice = doc.querySelector("#alerts .notice") as HTMLElement;
    expect(notice.getAttribute("role")).toBe("status");
  });

  it("stacks multiple alerts instead of replacing them", () => {
    const doc = freshDocument();
    showAlert(doc, "first", "a");
    showAlert(doc, "second", "b");
    expect(doc.querySelectorAll("#alerts > *").length).toBe(2);
  });

  it("renders the referrer error state", () => {
    const doc = freshDocument();
    renderDomainError(doc, "cannot determine TA domain");
    expect((doc.getElementById("verdict") as HTMLElement).dataset.state).toBe("error");
    expect(doc.getElementById("verdict")?.textContent).toContain("cannot determine TA domain");
    expect((doc.getElementById("subscribe-button") as HTMLElement).hidden).toBe(true);
  });

  it("marks the subscribe button after subscription", () => {
    const doc = freshDocument();
    markSubscribed(doc);
    const button = doc.getElementById("subscribe-button") as HTMLButtonElement;
    expect(button.disabled).toBe(true);
    expect(button.textContent).toContain("Subscribed");
  });

  it("setVerdict writes state and message atomically", () => {
    const doc = freshDocument();
    setVerdict(doc, "invalid", "Invalid — bad.");
    const verdict = doc.getElementById("verdict") as HTMLElement;
    expect(verdict.dataset.state).toBe("invalid");
    expect(verdict.textContent).toBe("Invalid — bad.");
  });
});
