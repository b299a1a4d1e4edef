// HTTP client for the correction service. At most one request is in
// flight at a time: newer text issued while a call is outstanding is
// coalesced and sent when the call settles, and every response is
// checked against the newest sequence number so a stale result is never
// rendered over fresher input.

export interface CorrectionResponse {
  corrected: string;
  completions: string[];
  tokens: number[];
  latency_ms: number;
}

export interface ClientCallbacks {
  /** Fresh result for the newest text the user produced. */
  onResult(text: string, response: CorrectionResponse): void;
  /** Server answered with an HTTP error (bad request, busy, crashed). */
  onHttpError?(status: number, message: string): void;
  /** Network failure: the server is unreachable. */
  onUnreachable?(error: unknown): void;
  /** First successful call after an unreachable period. */
  onRecovered?(): void;
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class CorrectionClient {
  private seq = 0;
  private inFlight = false;
  private queued: { seq: number; text: string } | null = null;
  private unreachable = false;
  private readonly fetchImpl: FetchLike;

  constructor(
    private readonly baseUrl: string,
    private readonly callbacks: ClientCallbacks,
    private readonly maxCompletions = 3,
    fetchImpl?: FetchLike,
  ) {
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  /** Number of requests actually sent over the wire. */
  sent = 0;

  isUnreachable(): boolean {
    return this.unreachable;
  }

  /** Ask for a correction of `text`; stale and superseded calls resolve
   * to nothing. Returns the sequence number assigned to this intent. */
  request(text: string): number {
    const seq = ++this.seq;
    if (this.inFlight) {
      this.queued = { seq, text };
    } else {
      void this.send(seq, text);
    }
    return seq;
  }

  private async send(seq: number, text: string): Promise<void> {
    this.inFlight = true;
    this.sent++;
    try {
      const res = await this.fetchImpl(this.baseUrl + "/api/v1/correct", {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ text, max_completions: this.maxCompletions }),
      });
      if (res.ok) {
        const payload = (await res.json()) as CorrectionResponse;
        if (this.unreachable) {
          this.unreachable = false;
          this.callbacks.onRecovered?.();
        }
        // drop the result if the user has typed something newer
        if (seq === this.seq) this.callbacks.onResult(text, payload);
      } else {
        let message = res.statusText;
        try {
          const body = (await res.json()) as { error?: string };
          if (body.error) message = body.error;
        } catch {
          // error body was not JSON, keep the status text
        }
        this.callbacks.onHttpError?.(res.status, message);
      }
    } catch (err) {
      this.unreachable = true;
      this.callbacks.onUnreachable?.(err);
    } finally {
      this.inFlight = false;
      const next = this.queued;
      this.queued = null;
      if (next !== null) void this.send(next.seq, next.text);
    }
  }

  /** One-shot health probe. */
  async healthy(): Promise<boolean> {
    try {
      const res = await this.fetchImpl(this.baseUrl + "/healthz");
      return res.ok;
    } catch {
      return false;
    }
  }
}
