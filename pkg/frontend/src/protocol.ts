/**
 * Wire protocol types and codecs.  Mirrors the server's documented schema:
 * JSON messages with a `type` tag over a persistent WebSocket.
 *
 * The client only ever sends `hello`, `begin`, `input`, and `survey`; it
 * never computes costs locally — the `frame.display` value is
 * server-authoritative.
 */

export interface WelcomeEvent {
  type: 'welcome';
  experiment: number;
  trials: number;
  status: string;
}

export interface TrialStartEvent {
  type: 'trialStart';
  index: number;
  target: number;
}

export interface FrameEvent {
  type: 'frame';
  display: number;
  i: number;
}

export interface TrialEndEvent {
  type: 'trialEnd';
  index: number;
}

export interface RestStartEvent {
  type: 'restStart';
  seconds: number;
}

export interface SimpleEvent {
  type: 'surveyPrompt' | 'experimentEnd';
}

export interface NoticeEvent {
  type: 'notice';
  message: string;
}

export interface ErrorEvent {
  type: 'error';
  code: string;
  message: string;
}

export type ServerEvent =
  | WelcomeEvent
  | TrialStartEvent
  | FrameEvent
  | TrialEndEvent
  | RestStartEvent
  | SimpleEvent
  | NoticeEvent
  | ErrorEvent;

export interface InputEvent {
  type: 'input';
  x: number;
  t: number;
}

export interface SurveyEvent {
  type: 'survey';
  scores: number[];
  feedback: string;
}

export type ClientEvent =
  | { type: 'hello'; session: string }
  | { type: 'begin' }
  | InputEvent
  | SurveyEvent;

const SERVER_TYPES = new Set([
  'welcome', 'trialStart', 'frame', 'trialEnd', 'restStart',
  'surveyPrompt', 'experimentEnd', 'notice', 'error',
]);

export function decodeServerEvent(raw: string): ServerEvent {
  const parsed = JSON.parse(raw) as { type?: string };
  if (!parsed || typeof parsed.type !== 'string' || !SERVER_TYPES.has(parsed.type)) {
    throw new Error(`unknown server event: ${raw}`);
  }
  return parsed as ServerEvent;
}

export function encodeClientEvent(event: ClientEvent): string {
  return JSON.stringify(event);
}
