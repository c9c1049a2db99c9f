import {
  type AudioMode,
  type ExportedTrace,
  type Placement,
  type SampleRow,
  validateTrace,
} from "./schema.js";

/**
 * Buffers devicemotion events into pipeline-ready sample rows.
 *
 * Rotation rates arrive in deg/s on most mobile platforms; rows are
 * normalized to rad/s and the original unit is recorded in the
 * export's `capture` block. Axis mapping follows the devicemotion
 * convention: rotationRate alpha/beta/gamma → gx/gy/gz.
 */

export type RotationRateUnit = "deg/s" | "rad/s";

const DEG_TO_RAD = Math.PI / 180;

/** The fields the handler reads; a real DeviceMotionEvent satisfies it. */
export interface MotionLikeEvent {
  timeStamp: number;
  accelerationIncludingGravity?: {
    x: number | null;
    y: number | null;
    z: number | null;
  } | null;
  rotationRate?: {
    alpha: number | null;
    beta: number | null;
    gamma: number | null;
  } | null;
}

export interface CaptureOptions {
  deviceId: string;
  sessionId?: string;
  placement?: Placement;
  audioMode?: AudioMode;
  rotationRateUnit?: RotationRateUnit;
  now?: () => Date;
}

export function defaultSessionId(now: Date): string {
  const stamp = now.toISOString().replace(/[-:]/g, "").replace(/\..*$/, "");
  const suffix = Math.floor(Math.random() * 0xffff)
    .toString(16)
    .padStart(4, "0");
  return `cap-${stamp}-${suffix}`;
}

export class CaptureSession {
  readonly deviceId: string;
  readonly sessionId: string;
  readonly placement: Placement;
  readonly rotationRateUnit: RotationRateUnit;
  audioMode: AudioMode;

  private readonly now: () => Date;
  private rows: SampleRow[] = [];
  private firstEventMs: number | null = null;
  private recording = false;

  constructor(options: CaptureOptions) {
    this.deviceId = options.deviceId;
    this.now = options.now ?? (() => new Date());
    this.sessionId = options.sessionId ?? defaultSessionId(this.now());
    this.placement = options.placement ?? "desk";
    this.audioMode = options.audioMode ?? "none";
    this.rotationRateUnit = options.rotationRateUnit ?? "deg/s";
  }

  get isRecording(): boolean {
    return this.recording;
  }

  get sampleCount(): number {
    return this.rows.length;
  }

  get durationMs(): number {
    if (this.rows.length < 2) return 0;
    return this.rows[this.rows.length - 1]![0] - this.rows[0]![0];
  }

  start(): void {
    this.recording = true;
  }

  stop(): void {
    this.recording = false;
  }

  /**
   * Consume one motion event; returns true if a row was buffered.
   * Events are ignored while stopped or when both channels are absent.
   */
  handleMotionEvent(event: MotionLikeEvent): boolean {
    if (!this.recording) return false;
    const accel = event.accelerationIncludingGravity ?? null;
    const rate = event.rotationRate ?? null;
    if (accel === null && rate === null) return false;

    if (this.firstEventMs === null) {
      this.firstEventMs = event.timeStamp;
    }
    const t = event.timeStamp - this.firstEventMs;
    const k = this.rotationRateUnit === "deg/s" ? DEG_TO_RAD : 1;
    this.rows.push([
      t,
      accel?.x ?? 0,
      accel?.y ?? 0,
      accel?.z ?? 0,
      (rate?.alpha ?? 0) * k,
      (rate?.beta ?? 0) * k,
      (rate?.gamma ?? 0) * k,
    ]);
    return true;
  }

  /** Export needs at least two samples; an empty run has nothing to save. */
  get canExport(): boolean {
    return this.rows.length >= 2;
  }

  /** Frozen, schema-shaped snapshot of the recording. */
  toTraceObject(): ExportedTrace {
    return {
      device_id: this.deviceId,
      session_id: this.sessionId,
      audio_mode: this.audioMode,
      placement: this.placement,
      samples: this.rows.map((row) => [...row] as SampleRow),
      capture: {
        rotation_rate_unit: this.rotationRateUnit,
        converted_to: "rad/s",
        exported_at: this.now().toISOString(),
        user_agent:
          typeof navigator === "undefined" ? "unknown" : navigator.userAgent,
      },
    };
  }

  /**
   * Serialize for download. The snapshot is validated against the
   * trace schema first; a recording that cannot ingest downstream is
   * never offered as a file.
   */
  exportJson(): string {
    const trace = this.toTraceObject();
    const result = validateTrace(trace);
    if (!result.ok) {
      throw new Error(`recording failed validation: ${result.errors.join("; ")}`);
    }
    return JSON.stringify(result.trace);
  }
}

/** Wire a session to a target's devicemotion events; returns a detach. */
export function attachMotionListener(
  session: CaptureSession,
  target: EventTarget,
): () => void {
  const handler = (event: Event) => {
    session.handleMotionEvent(event as unknown as MotionLikeEvent);
  };
  target.addEventListener("devicemotion", handler);
  return () => target.removeEventListener("devicemotion", handler);
}

export type MotionPermission =
  | "granted"
  | "denied"
  | "not-required"
  | "unsupported";

/**
 * Ask for motion-sensor access where the platform gates it.
 *
 * iOS exposes `DeviceMotionEvent.requestPermission` and requires a
 * user gesture; elsewhere the listener just works (or the API is
 * missing entirely).
 */
export async function requestMotionPermission(
  globalObject: typeof globalThis = globalThis,
): Promise<MotionPermission> {
  const ctor = (globalObject as Record<string, unknown>)["DeviceMotionEvent"] as
    | { requestPermission?: () => Promise<string> }
    | undefined;
  if (ctor === undefined) return "unsupported";
  if (typeof ctor.requestPermission !== "function") return "not-required";
  try {
    const response = await ctor.requestPermission();
    return response === "granted" ? "granted" : "denied";
  } catch {
    return "denied";
  }
}
