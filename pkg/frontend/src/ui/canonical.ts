/**
 * Canonical JSON encoder matching the verifier's push-message signing input:
 * keys sorted by code point, compact separators, and all non-ASCII characters
 * escaped as \uXXXX UTF-16 units. Signature verification depends on producing
 * byte-identical output for the same payload, so this is deliberately strict:
 * values that cannot round-trip exactly (non-finite numbers, negative zero,
 * integers beyond 2^53, undefined, functions) are rejected.
 */

const NAMED_ESCAPES: Record<string, string> = {
  '"': '\\"',
  "\\": "\\\\",
  "\b": "\\b",
  "\f": "\\f",
  "\n": "\\n",
  "\r": "\\r",
  "\t": "\\t",
};

function escapeString(value: string): string {
  let out = '"';
  for (let i = 0; i < value.length; i++) {
    const ch = value[i] as string;
    const named = NAMED_ESCAPES[ch];
    if (named !== undefined) {
      out += named;
      continue;
    }
    const code = value.charCodeAt(i);
    if (code < 0x20 || code > 0x7e) {
      out += "\\u" + code.toString(16).padStart(4, "0");
    } else {
      out += ch;
    }
  }
  return out + '"';
}

function codePointCompare(a: string, b: string): number {
  const aPoints = Array.from(a);
  const bPoints = Array.from(b);
  const n = Math.min(aPoints.length, bPoints.length);
  for (let i = 0; i < n; i++) {
    const ca = (aPoints[i] as string).codePointAt(0) as number;
    const cb = (bPoints[i] as string).codePointAt(0) as number;
    if (ca !== cb) return ca - cb;
  }
  return aPoints.length - bPoints.length;
}

function encodeNumber(value: number): string {
  if (!Number.isFinite(value)) throw new TypeError("non-finite number is not valid JSON");
  if (Object.is(value, -0)) throw new TypeError("negative zero does not canonicalize");
  if (Number.isInteger(value)) {
    if (!Number.isSafeInteger(value)) {
      throw new TypeError("integer exceeds exact double range");
    }
    return String(value);
  }
  return String(value);
}

function encode(value: unknown): string {
  if (value === null) return "null";
  switch (typeof value) {
    case "boolean":
      return value ? "true" : "false";
    case "number":
      return encodeNumber(value);
    case "string":
      return escapeString(value);
    case "object":
      break;
    default:
      throw new TypeError(`cannot canonicalize a ${typeof value}`);
  }
  if (Array.isArray(value)) {
    return "[" + value.map(encode).join(",") + "]";
  }
  const record = value as Record<string, unknown>;
  const keys = Object.keys(record).sort(codePointCompare);
  const parts = keys.map((key) => escapeString(key) + ":" + encode(record[key]));
  return "{" + parts.join(",") + "}";
}

/** Serialize to the canonical string form. */
export function canonicalJson(payload: unknown): string {
  return encode(payload);
}

/** Serialize to the exact UTF-8 bytes the verifier signs. */
export function canonicalJsonBytes(payload: unknown) {
  return new TextEncoder().encode(canonicalJson(payload));
}
