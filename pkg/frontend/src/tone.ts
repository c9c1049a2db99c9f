/**
 * 20 kHz sine playback for stimulated captures.
 *
 * Nominally inaudible; whether it actually excites a given device's
 * sensors depends on the hardware. The recorder tags the session's
 * audio_mode while the tone runs.
 */

export const TONE_FREQUENCY_HZ = 20000;
export const TONE_GAIN = 0.25;

interface OscillatorLike {
  type: string;
  frequency: { value: number };
  connect(node: unknown): void;
  start(): void;
  stop(): void;
}

interface GainLike {
  gain: { value: number };
  connect(node: unknown): void;
}

export interface AudioContextLike {
  destination: unknown;
  createOscillator(): OscillatorLike;
  createGain(): GainLike;
  close(): Promise<void>;
}

export class StimulationTone {
  private context: AudioContextLike | null = null;
  private oscillator: OscillatorLike | null = null;

  constructor(
    private readonly createContext: () => AudioContextLike = () =>
      new AudioContext() as unknown as AudioContextLike,
  ) {}

  get playing(): boolean {
    return this.oscillator !== null;
  }

  start(): void {
    if (this.oscillator !== null) return;
    const context = this.createContext();
    const oscillator = context.createOscillator();
    const gain = context.createGain();
    oscillator.type = "sine";
    oscillator.frequency.value = TONE_FREQUENCY_HZ;
    gain.gain.value = TONE_GAIN;
    oscillator.connect(gain);
    gain.connect(context.destination);
    oscillator.start();
    this.context = context;
    this.oscillator = oscillator;
  }

  async stop(): Promise<void> {
    if (this.oscillator === null || this.context === null) return;
    this.oscillator.stop();
    await this.context.close();
    this.oscillator = null;
    this.context = null;
  }
}
