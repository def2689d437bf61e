/**
 * Typed client for the verifier's HTTP API. The default base URL is empty so
 * every request is same-origin relative — the page only ever talks to the
 * verifier that served it. Tests may inject an absolute base and a fetch
 * implementation.
 */

export interface ViolationRecord {
  id: number;
  created_at: number;
  offending_log_index: number;
}

export interface TaStatusResponse {
  domain: string;
  valid: boolean;
  activated: boolean;
  rv: string;
  repository: string;
  commit_id: string;
  registered_at: number;
  violations: ViolationRecord[];
}

export type StatusResult =
  | { kind: "ok"; status: TaStatusResponse }
  | { kind: "unregistered" }
  | { kind: "network-error"; message: string };

export interface SubscriptionConfig {
  public_key: string;
}

export interface SubscriptionKeys {
  p256dh: string;
  auth: string;
}

export interface SubscriptionRequest {
  endpoint: string;
  keys: SubscriptionKeys;
}

export type SubscribeResult =
  | { kind: "created"; id: number }
  | { kind: "rejected"; status: number; message: string }
  | { kind: "network-error"; message: string };

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** The slice of the verifier API the page consumes. */
export interface VerifierApi {
  fetchStatus(domain: string): Promise<StatusResult>;
  subscriptionConfig(): Promise<SubscriptionConfig>;
  subscribe(request: SubscriptionRequest, referrer: string): Promise<SubscribeResult>;
}

function describeError(err: unknown): string {
  if (err instanceof Error) return err.message;
  return String(err);
}

export class ApiClient implements VerifierApi {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl = "", fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    // Wrap the global so it keeps its expected receiver when called as a
    // detached function.
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  async fetchStatus(domain: string): Promise<StatusResult> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}/api/ta/${encodeURIComponent(domain)}`);
    } catch (err) {
      return { kind: "network-error", message: describeError(err) };
    }
    if (response.status === 404) return { kind: "unregistered" };
    if (!response.ok) {
      return { kind: "network-error", message: `verifier responded with ${response.status}` };
    }
    try {
      const status = (await response.json()) as TaStatusResponse;
      return { kind: "ok", status };
    } catch (err) {
      return { kind: "network-error", message: describeError(err) };
    }
  }

  /** Fetch the verifier's push-signing public key (base64 SPKI DER). */
  async subscriptionConfig(): Promise<SubscriptionConfig> {
    const response = await this.fetchFn(`${this.baseUrl}/api/config/subscription`);
    if (!response.ok) {
      throw new Error(`subscription config unavailable (${response.status})`);
    }
    return (await response.json()) as SubscriptionConfig;
  }

  /**
   * Register a push subscription. The verifier derives the TA domain from
   * the request's referrer context, so the TA page URL is forwarded as the
   * Referer value.
   */
  async subscribe(request: SubscriptionRequest, referrer: string): Promise<SubscribeResult> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}/api/subscription`, {
        method: "POST",
        headers: { "Content-Type": "application/json", Referer: referrer },
        body: JSON.stringify(request),
      });
    } catch (err) {
      return { kind: "network-error", message: describeError(err) };
    }
    if (response.status === 201) {
      const body = (await response.json()) as { id: number };
      return { kind: "created", id: body.id };
    }
    let message = `verifier responded with ${response.status}`;
    try {
      const body = (await response.json()) as { detail?: unknown };
      if (typeof body.detail === "string") message = body.detail;
    } catch {
      // keep the status-based message
    }
    return { kind: "rejected", status: response.status, message };
  }
}
