import { defaultStore, persistentDeviceId } from "./device-id.js";
import {
  attachMotionListener,
  CaptureSession,
  requestMotionPermission,
  type RotationRateUnit,
} from "./recorder.js";
import { type Placement } from "./schema.js";
import { StimulationTone } from "./tone.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

const statusEl = el<HTMLParagraphElement>("status");
const deviceIdEl = el<HTMLElement>("device-id");
const sampleCountEl = el<HTMLElement>("sample-count");
const durationEl = el<HTMLElement>("duration");
const permissionBtn = el<HTMLButtonElement>("request-permission");
const startBtn = el<HTMLButtonElement>("start");
const stopBtn = el<HTMLButtonElement>("stop");
const exportBtn = el<HTMLButtonElement>("export");
const toneToggle = el<HTMLInputElement>("tone");
const placementSelect = el<HTMLSelectElement>("placement");
const unitSelect = el<HTMLSelectElement>("rotation-unit");
const targetSeconds = el<HTMLInputElement>("target-seconds");

const deviceId = persistentDeviceId(defaultStore());
deviceIdEl.textContent = deviceId;

const tone = new StimulationTone();
let session: CaptureSession | null = null;
let detach: (() => void) | null = null;
let stopTimer: number | null = null;

function setStatus(message: string, isError = false): void {
  statusEl.textContent = message;
  statusEl.classList.toggle("error", isError);
}

function refreshCounters(): void {
  sampleCountEl.textContent = String(session?.sampleCount ?? 0);
  durationEl.textContent = session
    ? `${(session.durationMs / 1000).toFixed(1)} s`
    : "0.0 s";
  exportBtn.disabled = !(session?.canExport ?? false);
}

if (!("DeviceMotionEvent" in window)) {
  setStatus("This browser does not expose motion sensors; recording is unavailable.", true);
  permissionBtn.disabled = true;
  startBtn.disabled = true;
}

permissionBtn.addEventListener("click", async () => {
  const result = await requestMotionPermission();
  switch (result) {
    case "granted":
      setStatus("Motion access granted.");
      break;
    case "not-required":
      setStatus("No permission needed on this platform.");
      break;
    case "denied":
      setStatus("Motion access denied; recording will stay empty.", true);
      break;
    case "unsupported":
      setStatus("Motion sensors are not available here.", true);
      break;
  }
});

startBtn.addEventListener("click", () => {
  if (session?.isRecording) return;
  if (toneToggle.checked) tone.start();
  session = new CaptureSession({
    deviceId,
    placement: placementSelect.value as Placement,
    audioMode: toneToggle.checked ? "sine20k" : "none",
    rotationRateUnit: unitSelect.value as RotationRateUnit,
  });
  detach = attachMotionListener(session, window);
  session.start();
  const poll = window.setInterval(refreshCounters, 250);
  const seconds = Number(targetSeconds.value) || 0;
  const finish = () => {
    window.clearInterval(poll);
    stopRecording();
  };
  stopTimer = seconds > 0 ? window.setTimeout(finish, seconds * 1000) : null;
  startBtn.disabled = true;
  stopBtn.disabled = false;
  setStatus(
    seconds > 0 ? `Recording for ${seconds} s...` : "Recording until stopped...",
  );
});

function stopRecording(): void {
  if (session === null) return;
  session.stop();
  detach?.();
  detach = null;
  if (stopTimer !== null) {
    window.clearTimeout(stopTimer);
    stopTimer = null;
  }
  void tone.stop();
  refreshCounters();
  startBtn.disabled = false;
  stopBtn.disabled = true;
  if (session.sampleCount === 0) {
    setStatus(
      "No motion events arrived — check permission and try again on a device with sensors.",
      true,
    );
  } else {
    setStatus(`Recorded ${session.sampleCount} samples.`);
  }
}

stopBtn.addEventListener("click", stopRecording);

exportBtn.addEventListener("click", () => {
  if (session === null || !session.canExport) return;
  let payload: string;
  try {
    payload = session.exportJson();
  } catch (error) {
    setStatus(String(error), true);
    return;
  }
  const blob = new Blob([payload], { type: "application/json" });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = `${deviceId}-${session.sessionId}.json`;
  anchor.click();
  URL.revokeObjectURL(url);
  setStatus(`Exported ${anchor.download}.`);
});

refreshCounters();
