import { describe, expect, it, vi } from "vitest";
import { CorrectionClient, type CorrectionResponse } from "../src/client.js";

function response(corrected: string, status = 200): Response {
  const payload: CorrectionResponse = {
    corrected,
    completions: [],
    tokens: [],
    latency_ms: 1,
  };
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

/** fetch stub whose promises settle only when the test says so */
function manualFetch() {
  const pending: Array<{
    url: string;
    text: string | undefined;
    resolve: (res: Response) => void;
    reject: (err: unknown) => void;
  }> = [];
  const impl = (url: string, init?: RequestInit): Promise<Response> =>
    new Promise((resolve, reject) => {
      const body = typeof init?.body === "string" ? init.body : undefined;
      const text = body === undefined ? undefined : (JSON.parse(body) as { text: string }).text;
      pending.push({ url, text, resolve, reject });
    });
  return { impl, pending };
}

function makeClient(fetchImpl: (url: string, init?: RequestInit) => Promise<Response>) {
  const events = {
    results: [] as Array<{ text: string; corrected: string }>,
    httpErrors: [] as Array<{ status: number; message: string }>,
    unreachable: 0,
    recovered: 0,
  };
  const client = new CorrectionClient(
    "http://example.test",
    {
      onResult: (text, res) => events.results.push({ text, corrected: res.corrected }),
      onHttpError: (status, message) => events.httpErrors.push({ status, message }),
      onUnreachable: () => events.unreachable++,
      onRecovered: () => events.recovered++,
    },
    3,
    fetchImpl,
  );
  return { client, events };
}

describe("CorrectionClient", () => {
  it("delivers a single result", async () => {
    const { impl, pending } = manualFetch();
    const { client, events } = makeClient(impl);
    client.request("abc");
    expect(pending).toHaveLength(1);
    expect(pending[0].text).toBe("abc");
    pending[0].resolve(response("abc!"));
    await vi.waitFor(() => expect(events.results).toHaveLength(1));
    expect(events.results[0]).toEqual({ text: "abc", corrected: "abc!" });
    expect(client.sent).toBe(1);
  });

  it("keeps at most one request in flight and coalesces to the newest text", async () => {
    const { impl, pending } = manualFetch();
    const { client, events } = makeClient(impl);
    client.request("a");
    client.request("ab");
    client.request("abc");
    // the two newer intents wait for the wire to clear
    expect(pending).toHaveLength(1);
    pending[0].resolve(response("A"));
    await vi.waitFor(() => expect(pending).toHaveLength(2));
    // the queued send skipped straight to the newest text
    expect(pending[1].text).toBe("abc");
    pending[1].resolve(response("ABC"));
    await vi.waitFor(() => expect(events.results).toHaveLength(1));
    // the first response was stale (sequence 1 of 3) and was dropped
    expect(events.results[0]).toEqual({ text: "abc", corrected: "ABC" });
    expect(client.sent).toBe(2);
  });

  it("drops a response that lands after newer input even with nothing queued", async () => {
    const { impl, pending } = manualFetch();
    const { client, events } = makeClient(impl);
    client.request("a");
    client.request("ab");
    pending[0].resolve(response("A"));
    await vi.waitFor(() => expect(pending).toHaveLength(2));
    expect(events.results).toHaveLength(0);
    pending[1].resolve(response("AB"));
    await vi.waitFor(() => expect(events.results).toHaveLength(1));
    expect(events.results[0].corrected).toBe("AB");
  });

  it("reports HTTP errors with the server's message", async () => {
    const { impl, pending } = manualFetch();
    const { client, events } = makeClient(impl);
    client.request("abc");
    pending[0].resolve(
      new Response(JSON.stringify({ error: "text exceeds 1024 characters" }), { status: 413 }),
    );
    await vi.waitFor(() => expect(events.httpErrors).toHaveLength(1));
    expect(events.httpErrors[0]).toEqual({ status: 413, message: "text exceeds 1024 characters" });
    expect(events.results).toHaveLength(0);
    expect(client.isUnreachable()).toBe(false);
  });

  it("flags network failure as unreachable and recovers on the next success", async () => {
    const { impl, pending } = manualFetch();
    const { client, events } = makeClient(impl);
    client.request("abc");
    pending[0].reject(new TypeError("fetch failed"));
    await vi.waitFor(() => expect(events.unreachable).toBe(1));
    expect(client.isUnreachable()).toBe(true);

    client.request("abcd");
    await vi.waitFor(() => expect(pending).toHaveLength(2));
    pending[1].resolve(response("ok"));
    await vi.waitFor(() => expect(events.recovered).toBe(1));
    expect(client.isUnreachable()).toBe(false);
    expect(events.results).toHaveLength(1);
  });

  it("probes health", async () => {
    const up = await makeClient(() => Promise.resolve(new Response("ok"))).client.healthy();
    expect(up).toBe(true);
    const down = await makeClient(() => Promise.reject(new Error("no"))).client.healthy();
    expect(down).toBe(false);
  });
});
