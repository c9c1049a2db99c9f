import { z } from "zod";

/**
 * Client-side mirror of the pipeline's trace JSON contract.
 *
 * A recording is only offered for download once it validates here, so
 * an exported file always ingests cleanly on the Python side:
 * non-empty identity strings, known mode/placement values, and
 * `samples` as rows of seven finite numbers
 * `[t_ms, ax, ay, az, gx, gy, gz]` (m/s² and rad/s) with
 * non-decreasing timestamps, at least two of them distinct.
 */

export const AUDIO_MODES = ["none", "sine20k", "song"] as const;
export const PLACEMENTS = ["desk", "hand"] as const;

export type AudioMode = (typeof AUDIO_MODES)[number];
export type Placement = (typeof PLACEMENTS)[number];

const finite = z.number().finite();

export const sampleRowSchema = z.tuple([
  finite, // t_ms
  finite, // ax
  finite, // ay
  finite, // az
  finite, // gx
  finite, // gy
  finite, // gz
]);

export type SampleRow = z.infer<typeof sampleRowSchema>;

/** Extra capture context; ignored by the pipeline but kept for provenance. */
export const captureInfoSchema = z
  .object({
    rotation_rate_unit: z.enum(["deg/s", "rad/s"]),
    converted_to: z.literal("rad/s"),
    exported_at: z.string(),
    user_agent: z.string(),
  })
  .partial();

export const traceSchema = z
  .object({
    device_id: z.string().min(1, "device_id must be non-empty"),
    session_id: z.string().min(1, "session_id must be non-empty"),
    audio_mode: z.enum(AUDIO_MODES),
    placement: z.enum(PLACEMENTS),
    samples: z.array(sampleRowSchema).min(2, "need at least 2 samples"),
    capture: captureInfoSchema.optional(),
  })
  .superRefine((trace, ctx) => {
    let distinct = 1;
    for (let i = 1; i < trace.samples.length; i++) {
      const prev = trace.samples[i - 1]![0];
      const cur = trace.samples[i]![0];
      if (cur < prev) {
        ctx.addIssue({
          code: z.ZodIssueCode.custom,
          path: ["samples", i, 0],
          message: `timestamps must be non-decreasing (sample ${i})`,
        });
        return;
      }
      if (cur > prev) distinct++;
    }
    if (distinct < 2) {
      ctx.addIssue({
        code: z.ZodIssueCode.custom,
        path: ["samples"],
        message: "need at least 2 distinct timestamps",
      });
    }
  });

export type ExportedTrace = z.infer<typeof traceSchema>;

export type ValidationResult =
  | { ok: true; trace: ExportedTrace }
  | { ok: false; errors: string[] };

export function validateTrace(value: unknown): ValidationResult {
  const parsed = traceSchema.safeParse(value);
  if (parsed.success) {
    return { ok: true, trace: parsed.data };
  }
  const errors = parsed.error.issues.map((issue) =>
    issue.path.length ? `${issue.path.join(".")}: ${issue.message}` : issue.message,
  );
  return { ok: false, errors };
}
