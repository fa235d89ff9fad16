import { z } from 'zod';

export const RouteDecisionSchema = z.object({
  kind: z.enum(['new_utterance', 'corrective_intent']),
  raw_response: z.string(),
});

export const CorrectionSchema = z.object({
  corrected_text: z.string(),
  trace: z.record(z.string()),
  raw_response: z.string(),
});

export const TurnRecordSchema = z.object({
  t: z.number().int().nonnegative(),
  input: z.union([z.object({ text: z.string() }), z.object({ audio: z.string() })]),
  hypothesis: z.string(),
  route: RouteDecisionSchema.nullable(),
  correction: CorrectionSchema.nullable(),
  resulting_transcript: z.string(),
  latency: z.record(z.number()),
  error: z.string().nullable(),
});

export const SessionSnapshotSchema = z.object({
  session_id: z.string(),
  created_at: z.string(),
  current_transcript: z.string(),
  turn_index: z.number().int().nonnegative(),
});

export const ApiErrorBodySchema = z.object({
  code: z.string(),
  message: z.string(),
});

export const TrajectorySchema = z.array(TurnRecordSchema);

export type RouteDecision = z.infer<typeof RouteDecisionSchema>;
export type Correction = z.infer<typeof CorrectionSchema>;
export type TurnRecord = z.infer<typeof TurnRecordSchema>;
export type SessionSnapshot = z.infer<typeof SessionSnapshotSchema>;
export type ApiErrorBody = z.infer<typeof ApiErrorBodySchema>;
