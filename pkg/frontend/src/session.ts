// One typing session: a stimulus sentence, the keystrokes and raw text a
// person produced, the corrections the server sent back, and the scores
// computed when the session ends. Sessions whose typed input strays more
// than 10% CER from the stimulus are kept but flagged invalid, so badly
// garbled attempts never count as evidence about the corrector.

import { cer } from "./cer.js";
import type { CorrectionResponse } from "./client.js";

export const CER_ACCEPT_LIMIT = 10.0;

export interface Keystroke {
  /** Milliseconds on the session clock; nondecreasing. */
  t: number;
  key: string;
}

export interface SessionRecord {
  stimulus: string;
  rawInput: string;
  correctedOutput: string;
  keystrokes: Keystroke[];
  responses: CorrectionResponse[];
  requestCount: number;
  durationMs: number;
  actualWps: number;
  /** Guessed from stimulus length and a reference typing rate. */
  idealWps: number;
  rawCer: number;
  correctedCer: number;
  valid: boolean;
}

export interface SessionOptions {
  /** Reference typing rate used for the ideal-WPS guess. */
  referenceCharsPerSecond?: number;
}

const DEFAULT_REFERENCE_CPS = 5;

function wordCount(text: string): number {
  return text.split(/\s+/).filter((w) => w.length > 0).length;
}

/** Words per second the stimulus would take at the reference typing
 * rate. The rate is a fixed assumption, not a measurement, which is
 * why the page labels this number an estimate. */
export function idealWps(stimulus: string, charsPerSecond = DEFAULT_REFERENCE_CPS): number {
  const chars = Array.from(stimulus).length;
  if (chars === 0) return 0;
  return wordCount(stimulus) / (chars / charsPerSecond);
}

export class Session {
  readonly stimulus: string;
  private raw = "";
  private corrected = "";
  private readonly keystrokes: Keystroke[] = [];
  private readonly responses: CorrectionResponse[] = [];
  private requestCount = 0;
  private readonly referenceCps: number;

  constructor(stimulus: string, options: SessionOptions = {}) {
    this.stimulus = stimulus;
    this.referenceCps = options.referenceCharsPerSecond ?? DEFAULT_REFERENCE_CPS;
  }

  /** Log one keystroke. Timestamps are clamped so the log stays
   * monotonically nondecreasing even if the caller's clock stutters. */
  addKeystroke(key: string, t: number): void {
    const last = this.keystrokes[this.keystrokes.length - 1];
    this.keystrokes.push({ key, t: last !== undefined && t < last.t ? last.t : t });
  }

  setRawInput(text: string): void {
    this.raw = text;
  }

  countRequest(): void {
    this.requestCount++;
  }

  addResponse(response: CorrectionResponse): void {
    this.responses.push(response);
    this.corrected = response.corrected;
  }

  get rawInput(): string {
    return this.raw;
  }

  get correctedOutput(): string {
    return this.corrected;
  }

  get requests(): number {
    return this.requestCount;
  }

  /** Milliseconds from first to last keystroke. */
  durationMs(): number {
    if (this.keystrokes.length < 2) return 0;
    return this.keystrokes[this.keystrokes.length - 1].t - this.keystrokes[0].t;
  }

  actualWps(): number {
    const ms = this.durationMs();
    if (ms <= 0) return 0;
    return wordCount(this.raw) / (ms / 1000);
  }

  /** Close the session and score it. */
  finish(): SessionRecord {
    const rawCer = cer(this.raw, this.stimulus);
    return {
      stimulus: this.stimulus,
      rawInput: this.raw,
      correctedOutput: this.corrected,
      keystrokes: [...this.keystrokes],
      responses: [...this.responses],
      requestCount: this.requestCount,
      durationMs: this.durationMs(),
      actualWps: this.actualWps(),
      idealWps: idealWps(this.stimulus, this.referenceCps),
      rawCer,
      correctedCer: cer(this.corrected, this.stimulus),
      valid: rawCer <= CER_ACCEPT_LIMIT,
    };
  }
}
