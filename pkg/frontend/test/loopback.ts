/**
 * In-memory stand-in for the session service, speaking the documented wire
 * protocol over a paired transport.  It implements the canonical-game
 * conjectural-variation experiment with the same arithmetic (and operation
 * order) as the real engine, so its slope trace must match the committed
 * fixture bit for bit.
 *
 * Cost evaluation lives here, in test code, on purpose: the client itself
 * never computes costs.
 */

import { Transport } from '../src/client.js';

// canonical quadratic game coefficients
const AH = 1.0, BH = -1 / 3, DH = 7 / 15, bH = 2 / 15, dH = -22 / 75, aH = 12 / 125;
const AM = 1.0, BM = -1.0, DM = 2.0, bM = 0.0, dM = 0.0;

export function costH(h: number, m: number): number {
  return 0.5 * AH * h * h + BH * h * m + 0.5 * DH * m * m + bH * h + dH * m + aH;
}

export function displayValue(c: number): number {
  return c > 0 ? Math.sqrt(c) : 0;
}

function median(values: number[]): number {
  const sorted = [...values].sort((a, b) => a - b);
  const n = sorted.length;
  if (n % 2 === 1) return sorted[(n - 1) / 2];
  return (sorted[n / 2 - 1] + sorted[n / 2]) / 2;
}

export interface LoopbackTrialSpec {
  target: number;
  sign: number;
}

export interface LoopbackOptions {
  trials: LoopbackTrialSpec[];   // 2 * iterations entries, nominal first
  samplesPerTrial: number;       // samples after the initial one
  delta: number;                 // intercept perturbation
  restEvery: number;
  dwellTicks: number;
  restSeconds?: number;
}

interface Pair {
  a: Transport;
  b: Transport;
}

/** Two transports wired back to back, delivering synchronously. */
export function transportPair(): Pair {
  let aHandler: ((text: string) => void) | null = null;
  let bHandler: ((text: string) => void) | null = null;
  const a: Transport = {
    send: (text) => bHandler?.(text),
    close: () => undefined,
    onMessage: (h) => { aHandler = h; },
    onClose: () => undefined,
  };
  const b: Transport = {
    send: (text) => aHandler?.(text),
    close: () => undefined,
    onMessage: (h) => { bHandler = h; },
    onClose: () => undefined,
  };
  return { a, b };
}

export class LoopbackServer {
  readonly sentDisplays: number[] = [];
  readonly slopeTrace: number[] = [];
  readonly conjectureTrace: number[] = [];
  readonly log: object[] = [];

  private slope = 1.0;          // machine best response to a zero conjecture
  private intercept = 0.0;
  private trialPtr = 0;
  private phase: 'intro' | 'attention' | 'running' | 'survey' | 'done' = 'intro';
  private dwell = 0;
  private hs: number[] = [];
  private ms: number[] = [];
  private pairMedians: { h: number; m: number }[] = [];

  constructor(private transport: Transport, private options: LoopbackOptions) {
    transport.onMessage((text) => this.receive(text));
  }

  private emit(event: object): void {
    this.log.push(event);
    this.transport.send(JSON.stringify(event));
  }

  private receive(text: string): void {
    const event = JSON.parse(text) as { type: string; x?: number; scores?: number[] };
    if (event.type === 'hello') {
      this.emit({ type: 'welcome', experiment: 2,
                  trials: this.options.trials.length, status: this.phase });
      return;
    }
    if (event.type === 'begin') {
      this.startTrial();
      return;
    }
    if (event.type === 'input') {
      this.onInput(Math.min(1, Math.max(-1, event.x ?? 0)));
      return;
    }
    if (event.type === 'survey') {
      if (this.phase !== 'survey') {
        this.emit({ type: 'error', code: 'bad-state', message: 'survey not open' });
        return;
      }
      this.phase = 'done';
      this.emit({ type: 'experimentEnd' });
    }
  }

  private startTrial(): void {
    const spec = this.options.trials[this.trialPtr];
    this.phase = 'attention';
    this.dwell = 0;
    this.hs = [];
    this.ms = [];
    this.emit({ type: 'trialStart', index: this.trialPtr, target: spec.target });
  }

  private currentPolicy(): { slope: number; intercept: number } {
    const perturbed = this.trialPtr % 2 === 1; // nominal first within each pair
    return {
      slope: this.slope,
      intercept: perturbed ? this.intercept + this.options.delta : this.intercept,
    };
  }

  private onInput(x: number): void {
    if (this.phase === 'attention') {
      const spec = this.options.trials[this.trialPtr];
      if (Math.abs(x - spec.target) <= 0.05) {
        this.dwell += 1;
      } else {
        this.dwell = 0;
      }
      if (this.dwell >= this.options.dwellTicks) {
        this.phase = 'running';
        this.sample(x);
      }
      return;
    }
    if (this.phase === 'running') {
      this.sample(x);
      return;
    }
    this.emit({ type: 'notice', message: 'input ignored outside a trial' });
  }

  private sample(x: number): void {
    const spec = this.options.trials[this.trialPtr];
    const policy = this.currentPolicy();
    const h = spec.sign * x;
    const m = policy.slope * h + policy.intercept;
    this.hs.push(h);
    this.ms.push(m);
    const display = displayValue(costH(h, m));
    this.sentDisplays.push(display);
    const i = this.hs.length - 1;
    this.emit({ type: 'frame', display, i });
    if (i >= this.options.samplesPerTrial) {
      this.finishTrial();
    }
  }

  private finishTrial(): void {
    this.emit({ type: 'trialEnd', index: this.trialPtr });
    this.pairMedians.push({ h: median(this.hs), m: median(this.ms) });
    this.trialPtr += 1;

    if (this.trialPtr % 2 === 0) {
      // a pair just completed: estimate the conjecture, best respond
      const nominal = this.pairMedians[0];
      const perturbed = this.pairMedians[1];
      this.pairMedians = [];
      const est = (perturbed.h - nominal.h) / (perturbed.m - nominal.m);
      this.conjectureTrace.push(est);
      this.slope = -(BM + est * DM) / (AM + est * BM);
      this.intercept = -(bM + est * dM) / (AM + est * BM);
      this.slopeTrace.push(this.slope);
    }

    if (this.trialPtr >= this.options.trials.length) {
      this.phase = 'survey';
      this.emit({ type: 'surveyPrompt' });
      return;
    }
    if (this.trialPtr % this.options.restEvery === 0) {
      this.emit({ type: 'restStart', seconds: this.options.restSeconds ?? 30 });
    }
    this.startTrial();
  }
}
