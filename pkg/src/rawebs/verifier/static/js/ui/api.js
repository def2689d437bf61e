/**
 * Typed client for the verifier's HTTP API. The default base URL is empty so
 * every request is same-origin relative — the page only ever talks to the
 * verifier that served it. Tests may inject an absolute base and a fetch
 * implementation.
 */
function describeError(err) {
    if (err instanceof Error)
        return err.message;
    return String(err);
}
export class ApiClient {
    constructor(baseUrl = "", fetchFn) {
        this.baseUrl = baseUrl.replace(/\/+$/, "");
        // Wrap the global so it keeps its expected receiver when called as a
        // detached function.
        this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
    }
    async fetchStatus(domain) {
        let response;
        try {
            response = await this.fetchFn(`${this.baseUrl}/api/ta/${encodeURIComponent(domain)}`);
        }
        catch (err) {
            return { kind: "network-error", message: describeError(err) };
        }
        if (response.status === 404)
            return { kind: "unregistered" };
        if (!response.ok) {
            return { kind: "network-error", message: `verifier responded with ${response.status}` };
        }
        try {
            const status = (await response.json());
            return { kind: "ok", status };
        }
        catch (err) {
            return { kind: "network-error", message: describeError(err) };
        }
    }
    /** Fetch the verifier's push-signing public key (base64 SPKI DER). */
    async subscriptionConfig() {
        const response = await this.fetchFn(`${this.baseUrl}/api/config/subscription`);
        if (!response.ok) {
            throw new Error(`subscription config unavailable (${response.status})`);
        }
        return (await response.json());
    }
    /**
     * Register a push subscription. The verifier derives the TA domain from
     * the request's referrer context, so the TA page URL is forwarded as the
     * Referer value.
     */
    async subscribe(request, referrer) {
        let response;
        try {
            response = await this.fetchFn(`${this.baseUrl}/api/subscription`, {
                method: "POST",
                headers: { "Content-Type": "application/json", Referer: referrer },
                body: JSON.stringify(request),
            });
        }
        catch (err) {
            return { kind: "network-error", message: describeError(err) };
        }
        if (response.status === 201) {
            const body = (await response.json());
            return { kind: "created", id: body.id };
        }
        let message = `verifier responded with ${response.status}`;
        try {
            const body = (await response.json());
            if (typeof body.detail === "string")
                message = body.detail;
        }
        catch {
            // keep the status-based message
        }
        return { kind: "rejected", status: response.status, message };
    }
}
