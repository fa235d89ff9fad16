import { DiffSegment, diffTranscripts } from './diff.js';
import { TurnRecord } from './types.js';

export interface ConsoleState {
  sessionId: string | null;
  transcript: string;
  turnIndex: number;
  pending: boolean;
  turns: TurnRecord[];
  lastError: string | null;
}

export function initialState(): ConsoleState {
  return {
    sessionId: null,
    transcript: '',
    turnIndex: 0,
    pending: false,
    turns: [],
    lastError: null,
  };
}

export function applyTurn(state: ConsoleState, record: TurnRecord): ConsoleState {
  return {
    ...state,
    transcript: record.error === null ? record.resulting_transcript : state.transcript,
    turnIndex: record.t + 1,
    pending: false,
    turns: [...state.turns, record],
    lastError: record.error,
  };
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export function renderDiff(segments: DiffSegment[]): string {
  return segments
    .map((segment) => {
      const text = escapeHtml(segment.tokens.join(' '));
      if (segment.status === 'removed') return `<del class="diff-removed">${text}</del>`;
      if (segment.status === 'added') return `<ins class="diff-added">${text}</ins>`;
      return `<span class="diff-equal">${text}</span>`;
    })
    .join(' ');
}

export function routeBadge(record: TurnRecord): string {
  if (record.route === null) return '<span class="badge badge-pending">PENDING</span>';
  const isCorrection = record.route.kind === 'corrective_intent';
  const label = isCorrection ? 'CORRECTION' : 'NEW';
  const cls = isCorrection ? 'badge-correction' : 'badge-new';
  return `<span class="badge ${cls}">${label}</span>`;
}

function renderTrace(record: TurnRecord): string {
  if (record.correction === null) return '';
  const entries = Object.entries(record.correction.trace);
  if (entries.length === 0) return '';
  const steps = entries
    .map(([step, detail]) => `<li><b>${escapeHtml(step)}</b>: ${escapeHtml(detail)}</li>`)
    .join('');
  return `<details class="trace"><summary>reasoning</summary><ol>${steps}</ol></details>`;
}

export function renderTurn(record: TurnRecord, previousTranscript: string): string {
  const inputLabel =
    'text' in record.input
      ? escapeHtml(record.input.text)
      : `&#127908; ${escapeHtml(record.input.audio)}`;
  const body =
    record.error !== null
      ? `<p class="turn-error">${escapeHtml(record.error)}</p>`
      : `<p class="turn-result">${renderDiff(
          diffTranscripts(previousTranscript, record.resulting_transcript),
        )}</p>`;
  return [
    `<article class="turn" data-turn="${record.t}">`,
    `<header>${routeBadge(record)}<span class="turn-input">${inputLabel}</span></header>`,
    body,
    renderTrace(record),
    '</article>',
  ]
    .filter((part) => part.length > 0)
    .join('\n');
}

export function renderConsole(state: ConsoleState): string {
  const turns: string[] = [];
  let previous = '';
  for (const record of state.turns) {
    turns.push(renderTurn(record, previous));
    if (record.error === null) previous = record.resulting_transcript;
  }
  const status = state.pending
    ? '<p class="status status-pending">turn in flight&hellip;</p>'
    : state.lastError !== null
      ? `<p class="status status-error">${escapeHtml(state.lastError)}</p>`
      : '';
  return [
    `<section class="transcript"><h2>Transcript</h2><p>${escapeHtml(state.transcript)}</p></section>`,
    `<section class="history">${turns.join('\n')}</section>`,
    status,
  ]
    .filter((part) => part.length > 0)
    .join('\n');
}

/** Serialize turns one JSON object per line with stable key order. */
export function exportTrajectory(turns: TurnRecord[]): string {
  const ordered = (record: TurnRecord) => ({
    correction: record.correction,
    error: record.error,
    hypothesis: record.hypothesis,
    input: record.input,
    latency: record.latency,
    resulting_transcript: record.resulting_transcript,
    route: record.route,
    t: record.t,
  });
  return turns.map((record) => JSON.stringify(ordered(record))).join('\n') + '\n';
}
