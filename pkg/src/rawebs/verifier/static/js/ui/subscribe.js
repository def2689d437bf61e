/**
 * Violation-alert subscription flow: ask for notification permission, fetch
 * the verifier's push key, register the background worker, obtain client key
 * material, and register the subscription with the verifier under the TA
 * page's referrer context.
 *
 * The subscription (endpoint plus keys) is persisted per TA domain so that
 * repeating the flow in the same browser profile re-sends the same endpoint,
 * which the verifier deduplicates into a single row.
 */
import { bytesToBase64, importVerifierKey } from "./push.js";
export const SERVICE_WORKER_PATH = "/static/js/sw/service-worker.js";
export const PERMISSION_EXPLANATION = "Notifications are required for violation alerts: without them the verifier " +
    "cannot warn you when this TA starts serving unattested code. Allow " +
    "notifications for this site and subscribe again.";
function storageKey(domain) {
    return `rawebs-subscription:${domain}`;
}
function loadStored(env) {
    const raw = env.storage.getItem(storageKey(env.domain));
    if (!raw)
        return null;
    try {
        const parsed = JSON.parse(raw);
        if (typeof parsed.endpoint === "string" &&
            typeof parsed.keys?.p256dh === "string" &&
            typeof parsed.keys?.auth === "string") {
            return parsed;
        }
    }
    catch {
        // fall through to minting a fresh subscription
    }
    return null;
}
function hex(bytes) {
    return Array.from(bytes, (b) => b.toString(16).padStart(2, "0")).join("");
}
async function obtainSubscription(env) {
    const stored = loadStored(env);
    if (stored)
        return stored;
    let subscription = await env.pushSubscription();
    if (!subscription) {
        // No push service is reachable at desk scale; mint a stand-in endpoint
        // under the verifier's own origin with fresh client key material.
        subscription = {
            endpoint: `${env.origin}/push/simulated/${hex(env.randomBytes(12))}`,
            keys: {
                p256dh: bytesToBase64(env.randomBytes(65)),
                auth: bytesToBase64(env.randomBytes(16)),
            },
        };
    }
    env.storage.setItem(storageKey(env.domain), JSON.stringify(subscription));
    return subscription;
}
export async function setupSubscription(env) {
    let permission;
    try {
        permission = await env.requestPermission();
    }
    catch {
        permission = "denied";
    }
    if (permission !== "granted") {
        return { kind: "permission-denied", explanation: PERMISSION_EXPLANATION };
    }
    let verifierKey;
    try {
        const config = await env.api.subscriptionConfig();
        verifierKey = await importVerifierKey(config.public_key);
    }
    catch (err) {
        return { kind: "failed", message: `could not fetch the verifier's push key: ${String(err)}` };
    }
    try {
        await env.registerWorker(SERVICE_WORKER_PATH);
    }
    catch (err) {
        return { kind: "failed", message: `could not register the notification worker: ${String(err)}` };
    }
    const subscription = await obtainSubscription(env);
    const result = await env.api.subscribe(subscription, env.referrer);
    switch (result.kind) {
        case "created":
            return { kind: "subscribed", endpoint: subscription.endpoint, verifierKey };
        case "rejected":
            return { kind: "failed", message: `verifier rejected the subscription: ${result.message}` };
        case "network-error":
            return { kind: "failed", message: `could not reach the verifier: ${result.message}` };
    }
}
/** Environment wired to real browser capabilities, degrading to stand-ins. */
export function defaultEnvironment(win, api, domain) {
    const navigatorAny = win.navigator;
    return {
        api,
        domain,
        referrer: win.document.referrer,
        origin: win.location.origin,
        storage: win.localStorage,
        requestPermission: () => {
            const notification = win.Notification;
            if (!notification)
                return Promise.resolve("granted");
            if (notification.permission === "granted")
                return Promise.resolve("granted");
            return notification.requestPermission();
        },
        registerWorker: (path) => {
            if (!navigatorAny.serviceWorker)
                return Promise.resolve(null);
            return navigatorAny.serviceWorker.register(path, { type: "module" });
        },
        pushSubscription: async () => {
            if (!navigatorAny.serviceWorker)
                return null;
            try {
                const registration = await navigatorAny.serviceWorker.ready;
                const manager = registration
                    .pushManager;
                if (!manager)
                    return null;
                const sub = await manager.subscribe({ userVisibleOnly: true });
                const p256dh = sub.getKey("p256dh");
                const auth = sub.getKey("auth");
                if (!p256dh || !auth)
                    return null;
                return {
                    endpoint: sub.endpoint,
                    keys: {
                        p256dh: bytesToBase64(new Uint8Array(p256dh)),
                        auth: bytesToBase64(new Uint8Array(auth)),
                    },
                };
            }
            catch {
                return null;
            }
        },
        randomBytes: (length) => {
            const bytes = new Uint8Array(length);
            crypto.getRandomValues(bytes);
            return bytes;
        },
    };
}
