/**
 * DOM rendering for the status page. All functions are pure writes against
 * the element ids served in the page shell; none of them derive trust state
 * themselves — the verdict shown is exactly the API's valid flag, with one
 * extra presentation state ("pending") for a registration that is not yet
 * activated and has no violations, which is still reported as not valid.
 */

import type { StatusResult, TaStatusResponse } from "./api.js";

export type VerdictState = "loading" | "valid" | "invalid" | "pending" | "unregistered" | "error";

function byId<T extends HTMLElement>(doc: Document, id: string): T {
  const el = doc.getElementById(id);
  if (!el) throw new Error(`status page is missing #${id}`);
  return el as T;
}

export function renderVerifierBanner(doc: Document, verifierHost: string): void {
  const banner = byId(doc, "verifier-banner");
  banner.textContent = "";
  banner.append("You are viewing the verification service. Confirm the address bar shows ");
  const host = doc.createElement("strong");
  host.textContent = verifierHost;
  banner.append(host);
  banner.append(" before trusting this page — an impostor page can imitate everything except the address.");
  banner.hidden = false;
}

export function renderHeaderDomain(doc: Document, domain: string | null): void {
  byId(doc, "header-domain").textContent = domain ? `— ${domain}` : "";
}

export function setVerdict(doc: Document, state: VerdictState, message: string): void {
  const verdict = byId(doc, "verdict");
  verdict.dataset.state = state;
  verdict.textContent = message;
}

function hide(doc: Document, id: string): void {
  byId(doc, id).hidden = true;
}

export function renderDomainError(doc: Document, message: string): void {
  setVerdict(doc, "error", message);
  hide(doc, "details");
  hide(doc, "violations");
  hide(doc, "subscribe-button");
}

function renderDetails(doc: Document, status: TaStatusResponse): void {
  byId(doc, "field-domain").textContent = status.domain;
  byId(doc, "field-rv").textContent = status.rv;
  const repository = byId(doc, "field-repository");
  repository.textContent = "";
  if (/^https?:\/\//.test(status.repository)) {
    const link = doc.createElement("a");
    link.href = status.repository;
    link.textContent = status.repository;
    link.rel = "noopener";
    repository.append(link);
  } else {
    repository.textContent = status.repository;
  }
  byId(doc, "field-commit").textContent = status.commit_id;
  const registered = new Date(status.registered_at * 1000).toISOString();
  byId(doc, "field-registered").textContent = `${registered} (${status.registered_at})`;
  byId(doc, "details").hidden = false;
}

function renderViolations(doc: Document, status: TaStatusResponse): void {
  const section = byId(doc, "violations");
  const rows = byId(doc, "violation-rows");
  rows.textContent = "";
  if (status.violations.length === 0) {
    section.hidden = true;
    return;
  }
  for (const violation of status.violations) {
    const row = doc.createElement("tr");
    for (const cell of [violation.id, violation.created_at, violation.offending_log_index]) {
      const td = doc.createElement("td");
      td.textContent = String(cell);
      row.append(td);
    }
    rows.append(row);
  }
  section.hidden = false;
}

function renderNetworkError(doc: Document, message: string, onRetry: () => void): void {
  const verdict = byId(doc, "verdict");
  verdict.dataset.state = "error";
  verdict.textContent = `could not reach the verifier: ${message} `;
  const retry = doc.createElement("button");
  retry.id = "retry-button";
  retry.type = "button";
  retry.textContent = "Retry";
  retry.addEventListener("click", onRetry);
  verdict.append(retry);
  hide(doc, "details");
  hide(doc, "violations");
  hide(doc, "subscribe-button");
}

/** Render a fetched status. The verdict mirrors the API's valid flag exactly. */
export function renderStatusResult(
  doc: Document,
  domain: string,
  result: StatusResult,
  onRetry: () => void,
): void {
  switch (result.kind) {
    case "network-error":
      renderNetworkError(doc, result.message, onRetry);
      return;
    case "unregistered":
      setVerdict(doc, "unregistered", `Unregistered TA — ${domain} is not registered with this verifier.`);
      hide(doc, "details");
      hide(doc, "violations");
      hide(doc, "subscribe-button");
      return;
    case "ok":
      break;
  }
  const status = result.status;
  if (status.valid) {
    setVerdict(doc, "valid", `Valid — ${status.domain} is serving its registered, attested code.`);
  } else if (status.violations.length > 0) {
    const count = status.violations.length;
    setVerdict(
      doc,
      "invalid",
      `Invalid — ${count} violation${count === 1 ? "" : "s"} recorded for ${status.domain}.`,
    );
  } else if (!status.activated) {
    setVerdict(
      doc,
      "pending",
      `Not yet verified — ${status.domain} is registered and awaiting CT log confirmation.`,
    );
  } else {
    setVerdict(doc, "invalid", `Invalid — the verifier reports ${status.domain} as not valid.`);
  }
  renderDetails(doc, status);
  renderViolations(doc, status);
  byId(doc, "subscribe-button").hidden = false;
}

/** Append a visible alert to the live region. */
export function showAlert(doc: Document, title: string, body: string, tone: "alert" | "notice" = "alert"): void {
  const alerts = byId(doc, "alerts");
  const item = doc.createElement("div");
  item.className = tone;
  item.setAttribute("role", tone === "alert" ? "alert" : "status");
  const heading = doc.createElement("strong");
  heading.textContent = title;
  item.append(heading);
  item.append(` — ${body}`);
  alerts.append(item);
}

export function markSubscribed(doc: Document): void {
  const button = byId<HTMLButtonElement>(doc, "subscribe-button");
  button.disabled = true;
  button.textContent = "Subscribed to violation alerts";
}
