// Page wiring: presents a stimulus sentence, captures live typing,
// debounces correction requests, and scores the session at the end.
// Keystroke capture never waits on the network; the handlers only
// append to in-memory logs, and responses arrive asynchronously with
// stale ones already filtered by the client.

import { CorrectionClient, type CorrectionResponse } from "./client.js";
import { debounce, type Debounced } from "./debounce.js";
import { exportSessions, persistSession } from "./exporter.js";
import { idealWps, Session, type SessionRecord } from "./session.js";
import { pickStimulus } from "./stimulus.js";

export interface AppConfig {
  baseUrl: string;
  stimuli: string[];
  debounceMs?: number;
  referenceCharsPerSecond?: number;
  /** Speed meter turns red below this fraction of the ideal rate. */
  slowFraction?: number;
  maxCompletions?: number;
  fetchImpl?: (url: string, init?: RequestInit) => Promise<Response>;
  now?: () => number;
  random?: () => number;
  download?: (text: string, filename: string) => void;
}

export interface App {
  readonly client: CorrectionClient;
  readonly records: SessionRecord[];
  currentSession(): Session;
  startSession(stimulus?: string): void;
  finishSession(): SessionRecord;
  dispose(): void;
}

function mustFind(root: Document, id: string): HTMLElement {
  const el = root.getElementById(id);
  if (el === null) throw new Error(`missing page element #${id}`);
  return el;
}

function blobDownload(root: Document): (text: string, filename: string) => void {
  return (text, filename) => {
    const blob = new Blob([text], { type: "application/json" });
    const url = URL.createObjectURL(blob);
    const anchor = root.createElement("a");
    anchor.href = url;
    anchor.download = filename;
    root.body.appendChild(anchor);
    anchor.click();
    root.body.removeChild(anchor);
    URL.revokeObjectURL(url);
  };
}

export function initApp(root: Document, config: AppConfig): App {
  const debounceMs = config.debounceMs ?? 150;
  const slowFraction = config.slowFraction ?? 0.5;
  const now = config.now ?? (() => performance.now());
  const download = config.download ?? blobDownload(root);

  const stimulusEl = mustFind(root, "stimulus");
  const input = mustFind(root, "typing") as HTMLInputElement;
  const correctedEl = mustFind(root, "corrected");
  const completionsEl = mustFind(root, "completions");
  const wpsEl = mustFind(root, "wps");
  const statusEl = mustFind(root, "status");
  const resultEl = mustFind(root, "result");
  const finishBtn = mustFind(root, "finish");
  const nextBtn = mustFind(root, "next");
  const exportBtn = mustFind(root, "export");

  // the demo measures the model's corrections, not the browser's
  input.autocomplete = "off";
  input.spellcheck = false;
  input.setAttribute("autocorrect", "off");
  input.setAttribute("autocapitalize", "none");

  const records: SessionRecord[] = [];
  let session = new Session(pickStimulus(config.stimuli, config.random), {
    referenceCharsPerSecond: config.referenceCharsPerSecond,
  });

  const client = new CorrectionClient(
    config.baseUrl,
    {
      onResult(text: string, response: CorrectionResponse) {
        session.addResponse(response);
        correctedEl.textContent = response.corrected;
        completionsEl.textContent =
          response.completions.length > 0 ? response.completions.join("  ") : "";
      },
      onHttpError(status: number, message: string) {
        statusEl.textContent = `server error ${status}: ${message}`;
        statusEl.classList.add("error");
      },
      onUnreachable() {
        statusEl.textContent = "server unreachable, typing is still logged";
        statusEl.classList.add("degraded");
      },
      onRecovered() {
        statusEl.textContent = "";
        statusEl.classList.remove("degraded", "error");
      },
    },
    config.maxCompletions ?? 3,
    config.fetchImpl,
  );

  const requestCorrection: Debounced<[string]> = debounce((text: string) => {
    session.countRequest();
    client.request(text);
  }, debounceMs);

  const renderWps = () => {
    const actual = session.actualWps();
    const ideal = idealWps(session.stimulus, config.referenceCharsPerSecond);
    wpsEl.textContent = `${actual.toFixed(2)} wps, ideal ${ideal.toFixed(2)} wps (estimate)`;
    wpsEl.classList.toggle("slow", actual < slowFraction * ideal);
  };

  const onKeydown = (event: KeyboardEvent) => {
    session.addKeystroke(event.key, now());
  };
  const onInput = () => {
    session.setRawInput(input.value);
    renderWps();
    requestCorrection(input.value);
  };

  input.addEventListener("keydown", onKeydown);
  input.addEventListener("input", onInput);

  const startSession = (stimulus?: string) => {
    requestCorrection.cancel();
    session = new Session(stimulus ?? pickStimulus(config.stimuli, config.random), {
      referenceCharsPerSecond: config.referenceCharsPerSecond,
    });
    stimulusEl.textContent = session.stimulus;
    input.value = "";
    correctedEl.textContent = "";
    completionsEl.textContent = "";
    resultEl.textContent = "";
    renderWps();
    input.focus();
  };

  const finishSession = (): SessionRecord => {
    requestCorrection.cancel();
    const record = session.finish();
    records.push(record);
    const verdict = record.valid ? "accepted" : "rejected (over 10% input CER)";
    resultEl.textContent =
      `input CER ${record.rawCer.toFixed(2)}%, ` +
      `corrected CER ${record.correctedCer.toFixed(2)}%, ${verdict}`;
    resultEl.classList.toggle("invalid", !record.valid);
    const stored = persistSession(record, root.defaultView!.localStorage, (text) =>
      download(text, "ccead-session.json"),
    );
    if (stored === "downloaded") {
      statusEl.textContent = "local storage failed, session offered as download";
    }
    return record;
  };

  const onFinish = () => void finishSession();
  const onNext = () => startSession();
  const onExport = () => {
    if (records.length === 0) return;
    download(exportSessions(records), "ccead-sessions.json");
  };

  finishBtn.addEventListener("click", onFinish);
  nextBtn.addEventListener("click", onNext);
  exportBtn.addEventListener("click", onExport);

  startSession();

  return {
    client,
    records,
    currentSession: () => session,
    startSession,
    finishSession,
    dispose() {
      requestCorrection.cancel();
      input.removeEventListener("keydown", onKeydown);
      input.removeEventListener("input", onInput);
      finishBtn.removeEventListener("click", onFinish);
      nextBtn.removeEventListener("click", onNext);
      exportBtn.removeEventListener("click", onExport);
    },
  };
}
