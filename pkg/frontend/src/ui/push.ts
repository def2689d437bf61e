/**
 * Verification of signed push messages. Every message from the verifier is an
 * envelope {payload, signature} where the signature is RSA PKCS#1 v1.5 with
 * SHA-256 over the payload's canonical JSON bytes. Nothing from a push message
 * is displayed until the signature verifies against the key published at
 * /api/config/subscription.
 */

import { canonicalJsonBytes } from "./canonical.js";

export interface PushEnvelope {
  payload: Record<string, unknown>;
  signature: string;
}

export type PushPayload =
  | {
      kind: "violation";
      domain: string;
      violation_id: number;
      created_at: number;
      offending_log_index: number;
    }
  | { kind: "reregistered"; domain: string; new_rv: string }
  | { kind: "broadcast"; message: string };

export function base64ToBytes(b64: string) {
  const binary = atob(b64);
  const bytes = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) bytes[i] = binary.charCodeAt(i);
  return bytes;
}

export function bytesToBase64(bytes: Uint8Array): string {
  let binary = "";
  for (let i = 0; i < bytes.length; i++) binary += String.fromCharCode(bytes[i] as number);
  return btoa(binary);
}

/** Import the verifier's push key (base64 SPKI DER) for signature checks. */
export async function importVerifierKey(spkiBase64: string): Promise<CryptoKey> {
  const der = base64ToBytes(spkiBase64);
  return crypto.subtle.importKey(
    "spki",
    der,
    { name: "RSASSA-PKCS1-v1_5", hash: "SHA-256" },
    false,
    ["verify"],
  );
}

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

function narrowPayload(payload: Record<string, unknown>): PushPayload | null {
  switch (payload.kind) {
    case "violation":
      if (
        typeof payload.domain === "string" &&
        typeof payload.violation_id === "number" &&
        typeof payload.created_at === "number" &&
        typeof payload.offending_log_index === "number"
      ) {
        return {
          kind: "violation",
          domain: payload.domain,
          violation_id: payload.violation_id,
          created_at: payload.created_at,
          offending_log_index: payload.offending_log_index,
        };
      }
      return null;
    case "reregistered":
      if (typeof payload.domain === "string" && typeof payload.new_rv === "string") {
        return { kind: "reregistered", domain: payload.domain, new_rv: payload.new_rv };
      }
      return null;
    case "broadcast":
      if (typeof payload.message === "string") {
        return { kind: "broadcast", message: payload.message };
      }
      return null;
    default:
      return null;
  }
}

/**
 * Check an incoming message against the verifier's push key. Returns the
 * typed payload when the signature verifies and the payload has a known
 * shape; null otherwise. Never throws on malformed input.
 */
export async function verifyPushEnvelope(key: CryptoKey, message: unknown): Promise<PushPayload | null> {
  if (!isRecord(message)) return null;
  const { payload, signature } = message as Partial<PushEnvelope>;
  if (!isRecord(payload) || typeof signature !== "string") return null;
  let signatureBytes: ReturnType<typeof base64ToBytes>;
  let payloadBytes: ReturnType<typeof canonicalJsonBytes>;
  try {
    signatureBytes = base64ToBytes(signature);
    payloadBytes = canonicalJsonBytes(payload);
  } catch {
    return null;
  }
  let ok: boolean;
  try {
    ok = await crypto.subtle.verify(
      "RSASSA-PKCS1-v1_5",
      key,
      signatureBytes,
      payloadBytes,
    );
  } catch {
    return null;
  }
  if (!ok) return null;
  return narrowPayload(payload);
}

/** Human-readable title/body for a verified payload, field-for-field. */
export function describePushPayload(payload: PushPayload): { title: string; body: string } {
  switch (payload.kind) {
    case "violation":
      return {
        title: `Violation detected for ${payload.domain}`,
        body:
          `violation #${payload.violation_id} — a certificate for this domain was issued ` +
          `to an unregistered key (log index ${payload.offending_log_index}, ` +
          `recorded at ${payload.created_at})`,
      };
    case "reregistered":
      return {
        title: `${payload.domain} was re-registered`,
        body: `the TA now attests a new measurement: ${payload.new_rv}`,
      };
    case "broadcast":
      return { title: "Verifier announcement", body: payload.message };
  }
}
