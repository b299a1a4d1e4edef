// Browser entry point. Stimuli come from ./stimuli.txt next to the
// page; the server address can be overridden with ?server=http://...

import { initApp } from "./app.js";
import { parseStimulusSet } from "./stimulus.js";

const FALLBACK_STIMULI = ["thanks i will call you"];

async function loadStimuli(): Promise<string[]> {
  try {
    const res = await fetch("./stimuli.txt");
    if (!res.ok) throw new Error(`HTTP ${res.status}`);
    return parseStimulusSet(await res.text());
  } catch {
    return FALLBACK_STIMULI;
  }
}

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("server") ?? "http://127.0.0.1:8080";

void loadStimuli().then((stimuli) => {
  initApp(document, { baseUrl, stimuli });
});
