/**
 * Background notification worker. Push payload signatures are verified by the
 * page (which holds the verifier's push key), so this worker never renders
 * message content itself: it forwards the envelope to every open status page
 * and falls back to a generic notification when no page is open.
 */

interface PushMessageData {
  json(): unknown;
}

interface PushEventLike extends Event {
  readonly data: PushMessageData | null;
  waitUntil(promise: Promise<unknown>): void;
}

interface ExtendableEventLike extends Event {
  waitUntil(promise: Promise<unknown>): void;
}

interface WindowClientLike {
  postMessage(message: unknown): void;
}

interface ClientsLike {
  matchAll(options?: { type?: string; includeUncontrolled?: boolean }): Promise<WindowClientLike[]>;
  claim(): Promise<void>;
}

interface RegistrationLike {
  showNotification?(title: string, options?: { body?: string }): Promise<void> | void;
}

export interface ServiceWorkerScope {
  addEventListener(type: string, listener: (event: never) => void): void;
  skipWaiting(): Promise<void>;
  clients: ClientsLike;
  registration: RegistrationLike;
}

/** Forward one push envelope to open pages, or show a generic notification. */
export async function forwardPush(scope: ServiceWorkerScope, envelope: unknown): Promise<void> {
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

export function attach(scope: ServiceWorkerScope): void {
  scope.addEventListener("install", () => {
    void scope.skipWaiting();
  });
  scope.addEventListener("activate", ((event: ExtendableEventLike) => {
    event.waitUntil(scope.clients.claim());
  }) as (event: never) => void);
  scope.addEventListener("push", ((event: PushEventLike) => {
    let envelope: unknown = null;
    try {
      envelope = event.data ? event.data.json() : null;
    } catch {
      envelope = null;
    }
    event.waitUntil(forwardPush(scope, envelope));
  }) as (event: never) => void);
}

const candidate = globalThis as unknown as Partial<ServiceWorkerScope>;
if (typeof candidate.skipWaiting === "function" && candidate.clients !== undefined) {
  attach(candidate as ServiceWorkerScope);
}
