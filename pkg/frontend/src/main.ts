import { ApiRequestError, SessionClient } from './api.js';
import { ConsoleState, applyTurn, exportTrajectory, initialState, renderConsole } from './view.js';

const client = new SessionClient(
  (window as { INTERASR_BASE_URL?: string }).INTERASR_BASE_URL ?? 'http://127.0.0.1:8080',
);

let state: ConsoleState = initialState();
let recorder: MediaRecorder | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

function redraw(): void {
  el('console').innerHTML = renderConsole(state);
  el<HTMLButtonElement>('send').disabled = state.pending || state.sessionId === null;
  el<HTMLButtonElement>('record').disabled = state.pending || state.sessionId === null;
  el<HTMLButtonElement>('export').disabled = state.turns.length === 0;
}

async function withTurn(post: () => Promise<import('./types.js').TurnRecord>): Promise<void> {
  state = { ...state, pending: true, lastError: null };
  redraw();
  try {
    state = applyTurn(state, await post());
  } catch (error) {
    if (error instanceof ApiRequestError && error.turn !== null) {
      state = applyTurn(state, error.turn);
    } else {
      const message = error instanceof Error ? error.message : String(error);
      state = { ...state, pending: false, lastError: message };
    }
  }
  redraw();
}

async function sendText(): Promise<void> {
  const input = el<HTMLInputElement>('text');
  const text = input.value.trim();
  if (text.length === 0 || state.sessionId === null) return;
  input.value = '';
  const sessionId = state.sessionId;
  await withTurn(() => client.postTextTurn(sessionId, text));
}

async function toggleRecording(): Promise<void> {
  if (recorder !== null) {
    recorder.stop();
    return;
  }
  const stream = await navigator.mediaDevices.getUserMedia({ audio: true });
  const chunks: Blob[] = [];
  recorder = new MediaRecorder(stream);
  recorder.ondataavailable = (event) => chunks.push(event.data);
  recorder.onstop = () => {
    stream.getTracks().forEach((track) => track.stop());
    recorder = null;
    el('record').textContent = 'Record';
    if (state.sessionId === null) return;
    const sessionId = state.sessionId;
    const clip = new Blob(chunks, { type: 'audio/webm' });
    void withTurn(() => client.postAudioTurn(sessionId, clip));
  };
  recorder.start();
  el('record').textContent = 'Stop';
}

function downloadTrajectory(): void {
  const blob = new Blob([exportTrajectory(state.turns)], { type: 'application/jsonl' });
  const link = document.createElement('a');
  link.href = URL.createObjectURL(blob);
  link.download = `${state.sessionId ?? 'session'}-trajectory.jsonl`;
  link.click();
  URL.revokeObjectURL(link.href);
}

async function boot(): Promise<void> {
  const snapshot = await client.createSession();
  state = { ...state, sessionId: snapshot.session_id };
  el('session-id').textContent = snapshot.session_id;
  el('send').addEventListener('click', () => void sendText());
  el<HTMLInputElement>('text').addEventListener('keydown', (event) => {
    if (event.key === 'Enter') void sendText();
  });
  el('record').addEventListener('click', () => void toggleRecording());
  el('export').addEventListener('click', downloadTrajectory);
  redraw();
}

void boot();
