/**
 * Background notification worker. Push payload signatures are verified by the
 * page (which holds the verifier's push key), so this worker never renders
 * message content itself: it forwards the envelope to every open status page
 * and falls back to a generic notification when no page is open.
 */
/** Forward one push envelope to open pages, or show a generic notification. */
export async function forwardPush(scope, envelope) {
    const clients = await scope.clients.matchAll({ type: "window", includeUncontrolled: true });
    for (const client of clients) {
        client.postMessage({ type: "rawebs-push", envelope });
    }
    if (clients.length === 0 && scope.registration.showNotification) {
        await scope.registration.showNotification("Verification alert", {
            body: "Open the TA status page for details.",
        });
    }
}
export function attach(scope) {
    scope.addEventListener("install", () => {
        void scope.skipWaiting();
    });
    scope.addEventListener("activate", ((event) => {
        event.waitUntil(scope.clients.claim());
    }));
    scope.addEventListener("push", ((event) => {
        let envelope = null;
        try {
            envelope = event.data ? event.data.json() : null;
        }
        catch {
            envelope = null;
        }
        event.waitUntil(forwardPush(scope, envelope));
    }));
}
const candidate = globalThis;
if (typeof candidate.skipWaiting === "function" && candidate.clients !== undefined) {
    attach(candidate);
}
