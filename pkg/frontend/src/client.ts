/**
 * The session client: a transport-agnostic state machine that drives the
 * experiment flow (intro -> attention/trials -> rests -> survey -> done),
 * forwards cursor samples upstream, and folds server events into a view.
 *
 * The transport is anything WebSocket-shaped; the browser entry point hands
 * in a real WebSocket and the tests a loopback pair.
 */

import {
  ClientEvent,
  decodeServerEvent,
  encodeClientEvent,
  ServerEvent,
} from './protocol.js';
import { Banner, ClientView, INITIAL_VIEW } from './view.js';

export interface Transport {
  send(text: string): void;
  close(): void;
  onMessage(handler: (text: string) => void): void;
  onClose(handler: () => void): void;
}

export interface FlowRecord {
  trialStarts: number[];
  trialEnds: number[];
  restsAfter: number[];   // completed-trial count at each rest
  frames: number;
  rendered: number[];     // every display value, in arrival order
  notices: string[];
  errors: string[];
}

export type ViewListener = (view: ClientView) => void;

export class SessionClient {
  readonly record: FlowRecord = {
    trialStarts: [],
    trialEnds: [],
    restsAfter: [],
    frames: 0,
    rendered: [],
    notices: [],
    errors: [],
  };

  private view: ClientView = { ...INITIAL_VIEW };
  private trialsTotal = 0;
  private trialsDone = 0;
  private samplesExpected: number;
  private samplesSeen = 0;
  private attention = false;
  private listeners: ViewListener[] = [];
  private donePromise: Promise<FlowRecord>;
  private resolveDone!: (record: FlowRecord) => void;
  private clock: () => number;

  constructor(
    private transport: Transport,
    private sessionId: string,
    options: { samplesExpected?: number; clock?: () => number } = {},
  ) {
    this.samplesExpected = options.samplesExpected ?? 1;
    this.clock = options.clock ?? (() => Date.now());
    this.donePromise = new Promise((resolve) => {
      this.resolveDone = resolve;
    });
    transport.onMessage((text) => this.handle(decodeServerEvent(text)));
    transport.onClose(() => this.setBanner({ kind: 'disconnected' }));
  }

  onView(listener: ViewListener): void {
    this.listeners.push(listener);
    listener(this.view);
  }

  currentView(): ClientView {
    return this.view;
  }

  done(): Promise<FlowRecord> {
    return this.donePromise;
  }

  hello(): void {
    this.send({ type: 'hello', session: this.sessionId });
  }

  begin(): void {
    this.send({ type: 'begin' });
  }

  /** Forward one normalized cursor sample upstream. */
  sendCursor(x: number): void {
    this.send({ type: 'input', x, t: this.clock() });
  }

  submitSurvey(scores: number[], feedback: string): void {
    if (scores.length !== 6 || scores.some((s) => !Number.isInteger(s) || s < -10 || s > 10)) {
      throw new Error('survey needs six integers in [-10, 10]');
    }
    this.send({ type: 'survey', scores, feedback });
  }

  private send(event: ClientEvent): void {
    this.transport.send(encodeClientEvent(event));
  }

  private setBanner(banner: Banner): void {
    this.view = { ...this.view, banner };
    this.emit();
  }

  private emit(): void {
    for (const listener of this.listeners) {
      listener(this.view);
    }
  }

  private handle(event: ServerEvent): void {
    switch (event.type) {
      case 'welcome':
        this.trialsTotal = event.trials;
        break;
      case 'trialStart':
        this.attention = true;
        this.samplesSeen = 0;
        this.record.trialStarts.push(event.index);
        this.view = {
          ...this.view,
          target: event.target,
          progress: 0,
          banner: {
            kind: 'trial', index: event.index, total: this.trialsTotal,
            attention: true,
          },
        };
        this.emit();
        break;
      case 'frame':
        if (this.attention) {
          // first frame means the attention gate opened
          this.attention = false;
          this.setBanner({
            kind: 'trial', index: this.record.trialStarts.at(-1) ?? 0,
            total: this.trialsTotal, attention: false,
          });
        }
        this.record.frames += 1;
        this.record.rendered.push(event.display);
        this.samplesSeen = event.i + 1;
        this.view = {
          ...this.view,
          display: event.display,
          progress: Math.min(1, this.samplesSeen / (this.samplesExpected + 1)),
        };
        this.emit();
        break;
      case 'trialEnd':
        this.trialsDone += 1;
        this.record.trialEnds.push(event.index);
        this.view = { ...this.view, display: null, target: null };
        this.emit();
        break;
      case 'restStart':
        this.record.restsAfter.push(this.trialsDone);
        this.setBanner({ kind: 'rest', secondsLeft: event.seconds });
        break;
      case 'surveyPrompt':
        this.setBanner({ kind: 'survey' });
        break;
      case 'experimentEnd':
        this.setBanner({ kind: 'done' });
        this.resolveDone(this.record);
        break;
      case 'notice':
        this.record.notices.push(event.message);
        break;
      case 'error':
        this.record.errors.push(event.message);
        break;
    }
  }
}
