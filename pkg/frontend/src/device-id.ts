/**
 * Persistent random device identity.
 *
 * The first visit draws a large random number, stores it, and every
 * later session reuses it — so repeat recordings from the same
 * browser share a `device_id` without any server involvement.
 */

export const DEVICE_ID_KEY = "sensorprint.device-id";

const ID_PATTERN = /^web-[0-9a-f]{32}$/;

export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export function randomDeviceId(
  fillRandom: (bytes: Uint8Array) => void = (bytes) => crypto.getRandomValues(bytes),
): string {
  const bytes = new Uint8Array(16);
  fillRandom(bytes);
  let hex = "";
  for (const b of bytes) hex += b.toString(16).padStart(2, "0");
  return `web-${hex}`;
}

export function persistentDeviceId(
  store: KeyValueStore,
  fillRandom?: (bytes: Uint8Array) => void,
): string {
  const existing = store.getItem(DEVICE_ID_KEY);
  if (existing && ID_PATTERN.test(existing)) {
    return existing;
  }
  const id = randomDeviceId(fillRandom);
  store.setItem(DEVICE_ID_KEY, id);
  return id;
}

/** In-memory fallback for contexts where localStorage throws. */
export function memoryStore(): KeyValueStore {
  const map = new Map<string, string>();
  return {
    getItem: (key) => map.get(key) ?? null,
    setItem: (key, value) => {
      map.set(key, value);
    },
  };
}

/** localStorage when usable, otherwise a per-page in-memory store. */
export function defaultStore(): KeyValueStore {
  try {
    const probe = "sensorprint.storage-probe";
    window.localStorage.setItem(probe, "1");
    window.localStorage.removeItem(probe);
    return window.localStorage;
  } catch {
    return memoryStore();
  }
}
