/**
 * The TA domain is taken exclusively from the referring document's origin.
 * Nothing else on the page — in particular no query parameter — may name the
 * domain, because the URL is attacker-controlled while the referrer is set by
 * the browser. Direct navigation therefore fails closed.
 */
export function resolveTaDomain(referrer) {
    if (!referrer)
        return { ok: false, reason: "no-referrer" };
    let url;
    try {
        url = new URL(referrer);
    }
    catch {
        return { ok: false, reason: "bad-referrer" };
    }
    if (url.protocol !== "http:" && url.protocol !== "https:") {
        return { ok: false, reason: "bad-referrer" };
    }
    if (!url.hostname)
        return { ok: false, reason: "bad-referrer" };
    // URL parsing already lowercases the hostname, matching the verifier's
    // canonical domain form.
    return { ok: true, domain: url.hostname };
}
export const DOMAIN_ERROR_MESSAGE = "cannot determine TA domain — open this page through the link on the TA's own site (direct navigation carries no referrer)";
