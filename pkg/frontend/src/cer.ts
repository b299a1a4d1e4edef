// Edit distance and character error rate, kept interchangeable with the
// server-side implementation. shared/cer_vectors.json is the contract:
// both sides must produce those values exactly, so everything here works
// in float64 over Unicode code points (string indexing in JS would count
// UTF-16 units and disagree on anything outside the basic plane).

/** Unit-cost edit distance from s to t over code points. */
export function levenshtein(s: string, t: string): number {
  const sc = Array.from(s);
  const tc = Array.from(t);
  const n = sc.length;
  const m = tc.length;
  let prev = new Array<number>(n + 1);
  prev[0] = 0.0;
  for (let j = 1; j <= n; j++) prev[j] = prev[j - 1] + 1.0;
  for (let i = 1; i <= m; i++) {
    const ti = tc[i - 1];
    const cur = new Array<number>(n + 1);
    cur[0] = prev[0] + 1.0;
    for (let j = 1; j <= n; j++) {
      if (sc[j - 1] === ti) {
        cur[j] = prev[j - 1];
      } else {
        cur[j] = Math.min(prev[j] + 1.0, cur[j - 1] + 1.0, prev[j - 1] + 1.0);
      }
    }
    prev = cur;
  }
  return prev[n];
}

/** Character error rate as a percentage of the truth length (floor 1). */
export function cer(pred: string, truth: string): number {
  return (100.0 * levenshtein(pred, truth)) / Math.max(1, Array.from(truth).length);
}
