// @vitest-environment jsdom
//
// Live end-to-end run: train a tiny model that memorizes a fixed corpus,
// serve it over HTTP, and drive the real page wiring against it. Typing
// the memorized stimulus must yield the stimulus back as the corrected
// text within half a second of the typing pause, and the exported CER
// must agree with the command-line scorer.

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { initApp, type App } from "../src/app.js";

// vitest runs from the frontend directory; the Python package is one up
const REPO_ROOT = resolve(process.cwd(), "..");
const PYTHON = process.env.CCEAD_DEMO_PYTHON ?? "python3";

const STIMULUS = "thanks i will call you";
const NOISY = [
  "helo wrld how are yuo",
  "the cta sat on hte mat",
  "plese send teh reprot",
  "thanka i will cal you",
  "see yuo at the ofice",
  "waht time wrks for you",
  "cal me wehn you can",
  "teh reprot is redy now",
];
const CLEAN = [
  "hello world how are you",
  "the cat sat on the mat",
  "please send the report",
  STIMULUS,
  "see you at the office",
  "what time works for you",
  "call me when you can",
  "the report is ready now",
];

const PAGE = `
  <div id="stimulus"></div>
  <input id="typing" type="text">
  <span id="corrected"></span>
  <span id="completions"></span>
  <span id="wps"></span>
  <span id="status"></span>
  <span id="result"></span>
  <button id="finish"></button>
  <button id="next"></button>
  <button id="export"></button>
`;

let workDir: string;
let checkpoint: string;
let server: ChildProcess | null = null;
let baseUrl = "";

function trainModel(): void {
  const noisyPath = join(workDir, "noisy.txt");
  const cleanPath = join(workDir, "clean.txt");
  const cfgPath = join(workDir, "model.cfg");
  // noisy->clean teaches correction; clean->clean makes verbatim typing
  // of the stimulus an in-distribution input
  writeFileSync(noisyPath, [...NOISY, ...NOISY, ...NOISY, ...NOISY, ...CLEAN].join("\n") + "\n");
  writeFileSync(cleanPath, [...CLEAN, ...CLEAN, ...CLEAN, ...CLEAN, ...CLEAN].join("\n") + "\n");
  writeFileSync(
    cfgPath,
    "embed_dim=8\nhidden=12\nchar_window=30\nword_window=5\nfilters=2\n" +
      "widths=2,3\ndropout=0.0\nlearning_rate=0.01\nbatch_size=8\nepochs=40\nseed=3\n",
  );
  execFileSync(
    PYTHON,
    ["-m", "ccead.cli", "train", noisyPath, cleanPath,
      "--config", cfgPath, "--checkpoint", checkpoint, "--vocab-size", "64"],
    { cwd: REPO_ROOT, stdio: "pipe", timeout: 120_000 },
  );
}

function startServer(): Promise<string> {
  return new Promise((resolvePort, rejectPort) => {
    server = spawn(PYTHON, ["-m", "ccead.cli", "serve", "--checkpoint", checkpoint, "--port", "0"], {
      cwd: REPO_ROOT,
      stdio: ["ignore", "pipe", "pipe"],
    });
    let stderr = "";
    const timer = setTimeout(
      () => rejectPort(new Error(`server never announced a port; stderr so far:\n${stderr}`)),
      30_000,
    );
    server.stderr!.on("data", (chunk: Buffer) => {
      stderr += chunk.toString();
      const match = /serving on ([\d.]+):(\d+)/.exec(stderr);
      if (match) {
        clearTimeout(timer);
        resolvePort(`http://${match[1]}:${match[2]}`);
      }
    });
    server.on("exit", (code) => {
      clearTimeout(timer);
      rejectPort(new Error(`server exited early (${code}); stderr:\n${stderr}`));
    });
  });
}

async function waitHealthy(url: string): Promise<void> {
  for (let i = 0; i < 100; i++) {
    try {
      const res = await fetch(`${url}/healthz`);
      if (res.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 100));
  }
  throw new Error("server never became healthy");
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "ccead-demo-"));
  checkpoint = join(workDir, "model.ckpt");
  trainModel();
  baseUrl = await startServer();
  await waitHealthy(baseUrl);
});

afterAll(() => {
  server?.kill();
  rmSync(workDir, { recursive: true, force: true });
});

function boot(): App {
  document.body.innerHTML = PAGE;
  return initApp(document, {
    baseUrl,
    stimuli: [STIMULUS],
    debounceMs: 150,
    download: () => undefined,
    fetchImpl: (url, init) => fetch(url, init),
  });
}

async function typeLive(input: HTMLInputElement, text: string, gapMs: number): Promise<void> {
  for (const ch of text) {
    input.value += ch;
    input.dispatchEvent(new window.KeyboardEvent("keydown", { key: ch, bubbles: true }));
    input.dispatchEvent(new window.Event("input", { bubbles: true }));
    await new Promise((r) => setTimeout(r, gapMs));
  }
}

describe("live demo against a real server", () => {
  it("corrects the memorized stimulus within 500 ms of the typing pause", async () => {
    const app = boot();
    const input = document.getElementById("typing") as HTMLInputElement;
    const corrected = document.getElementById("corrected")!;

    await typeLive(input, STIMULUS, 5);
    const pausedAt = Date.now();
    while (corrected.textContent !== STIMULUS) {
      if (Date.now() - pausedAt > 500) {
        throw new Error(
          `corrected text is ${JSON.stringify(corrected.textContent)} after 500ms`,
        );
      }
      await new Promise((r) => setTimeout(r, 10));
    }
    expect(Date.now() - pausedAt).toBeLessThanOrEqual(500);

    const record = app.finishSession();
    expect(record.correctedOutput).toBe(STIMULUS);
    expect(record.correctedCer).toBe(0);
    expect(record.valid).toBe(true);
    app.dispose();
  });

  it("corrects a typo-ridden rendering of the stimulus the model trained on", async () => {
    const app = boot();
    const input = document.getElementById("typing") as HTMLInputElement;
    const corrected = document.getElementById("corrected")!;

    await typeLive(input, "thanka i will cal you", 5);
    const pausedAt = Date.now();
    while (corrected.textContent !== STIMULUS) {
      if (Date.now() - pausedAt > 500) {
        throw new Error(
          `corrected text is ${JSON.stringify(corrected.textContent)} after 500ms`,
        );
      }
      await new Promise((r) => setTimeout(r, 10));
    }
    const record = app.finishSession();
    expect(record.correctedCer).toBe(0);
    expect(record.rawCer).toBeGreaterThan(0);
    expect(record.valid).toBe(true); // two edits over 22 chars is under the gate
    app.dispose();
  });

  it("trips the acceptance gate on a deliberately garbled session", async () => {
    const app = boot();
    const input = document.getElementById("typing") as HTMLInputElement;
    await typeLive(input, "zzq qanka platypus xyzzy", 2);
    const record = app.finishSession();
    expect(record.rawCer).toBeGreaterThan(10);
    expect(record.valid).toBe(false);
    app.dispose();
  });

  it("logs CERs the command-line scorer reproduces", async () => {
    const app = boot();
    const input = document.getElementById("typing") as HTMLInputElement;
    await typeLive(input, "thanka i will cal you", 2);
    const record = app.finishSession();
    app.dispose();

    // re-score the exported raw input: the identity evaluation of
    // (raw, stimulus) is exactly the session's input CER
    const noisyPath = join(workDir, "x_raw.txt");
    const cleanPath = join(workDir, "x_stim.txt");
    const outPath = join(workDir, "x_summary.tsv");
    writeFileSync(noisyPath, record.rawInput + "\n");
    writeFileSync(cleanPath, record.stimulus + "\n");
    execFileSync(
      PYTHON,
      ["-m", "ccead.cli", "eval", noisyPath, cleanPath, "--identity", "--out", outPath],
      { cwd: REPO_ROOT, stdio: "pipe", timeout: 60_000 },
    );
    const [header, values] = readFileSync(outPath, "utf-8").trim().split("\n");
    const cerColumn = header.split("\t").indexOf("cer_percent");
    const cliCer = Number(values.split("\t")[cerColumn]);
    // the TSV carries six decimals; agree to that precision
    expect(Math.abs(cliCer - record.rawCer)).toBeLessThan(5e-7);
  });
});
