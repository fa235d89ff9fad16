import {
  ApiErrorBodySchema,
  SessionSnapshot,
  SessionSnapshotSchema,
  TrajectorySchema,
  TurnRecord,
  TurnRecordSchema,
} from './types.js';

export class ApiRequestError extends Error {
  readonly status: number;
  readonly code: string;
  readonly turn: TurnRecord | null;

  constructor(status: number, code: string, message: string, turn: TurnRecord | null = null) {
    super(message);
    this.name = 'ApiRequestError';
    this.status = status;
    this.code = code;
    this.turn = turn;
  }
}

async function raiseFromResponse(response: Response): Promise<never> {
  let body: unknown = null;
  try {
    body = await response.json();
  } catch {
    // non-JSON error body: fall through to the generic error
  }
  const parsed = ApiErrorBodySchema.safeParse(body);
  if (parsed.success) {
    // a failed turn (502) still carries the recorded turn alongside the envelope
    const turn =
      body !== null && typeof body === 'object' && 'turn' in body
        ? TurnRecordSchema.parse((body as { turn: unknown }).turn)
        : null;
    throw new ApiRequestError(response.status, parsed.data.code, parsed.data.message, turn);
  }
  throw new ApiRequestError(response.status, 'http_error', `HTTP ${response.status}`);
}

export class SessionClient {
  readonly baseUrl: string;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, '');
  }

  async health(): Promise<boolean> {
    try {
      const response = await fetch(`${this.baseUrl}/healthz`);
      return response.ok;
    } catch {
      return false;
    }
  }

  async createSession(sessionId?: string): Promise<SessionSnapshot> {
    const response = await fetch(`${this.baseUrl}/v1/sessions`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(sessionId === undefined ? {} : { session_id: sessionId }),
    });
    if (!response.ok) await raiseFromResponse(response);
    return SessionSnapshotSchema.parse(await response.json());
  }

  async postTextTurn(sessionId: string, text: string): Promise<TurnRecord> {
    const response = await fetch(`${this.baseUrl}/v1/sessions/${encodeURIComponent(sessionId)}/turns`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ text }),
    });
    if (!response.ok) await raiseFromResponse(response);
    return TurnRecordSchema.parse(await response.json());
  }

  async postAudioTurn(sessionId: string, audio: Blob, filename = 'clip.webm'): Promise<TurnRecord> {
    const form = new FormData();
    form.append('audio', audio, filename);
    const response = await fetch(`${this.baseUrl}/v1/sessions/${encodeURIComponent(sessionId)}/turns`, {
      method: 'POST',
      body: form,
    });
    if (!response.ok) await raiseFromResponse(response);
    return TurnRecordSchema.parse(await response.json());
  }

  async getSession(sessionId: string): Promise<SessionSnapshot> {
    const response = await fetch(`${this.baseUrl}/v1/sessions/${encodeURIComponent(sessionId)}`);
    if (!response.ok) await raiseFromResponse(response);
    return SessionSnapshotSchema.parse(await response.json());
  }

  async getTrajectory(sessionId: string): Promise<TurnRecord[]> {
    const response = await fetch(
      `${this.baseUrl}/v1/sessions/${encodeURIComponent(sessionId)}/trajectory`,
    );
    if (!response.ok) await raiseFromResponse(response);
    return TrajectorySchema.parse(await response.json());
  }
}
