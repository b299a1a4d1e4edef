// Session persistence and export. Finished sessions land in
// localStorage; when storage misbehaves the record is offered as a
// download instead so nothing is ever silently dropped. Exports are a
// schema-versioned JSON document that re-imports losslessly.

import type { SessionRecord } from "./session.js";

export const EXPORT_SCHEMA = "ccead-web-demo/1";
export const STORAGE_KEY = "ccead-demo-sessions";

export interface ExportDocument {
  schema: string;
  exportedAt: string;
  sessions: SessionRecord[];
}

export function exportSessions(sessions: SessionRecord[], now: () => Date = () => new Date()): string {
  const doc: ExportDocument = {
    schema: EXPORT_SCHEMA,
    exportedAt: now().toISOString(),
    sessions,
  };
  return JSON.stringify(doc, null, 2);
}

export function importSessions(text: string): SessionRecord[] {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch {
    throw new Error("export file is not valid JSON");
  }
  const candidate = doc as Partial<ExportDocument>;
  if (candidate.schema !== EXPORT_SCHEMA) {
    throw new Error(`unsupported export schema: ${String(candidate.schema)}`);
  }
  if (!Array.isArray(candidate.sessions)) {
    throw new Error("export file has no sessions array");
  }
  return candidate.sessions;
}

interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export function loadStoredSessions(storage: StorageLike): SessionRecord[] {
  const text = storage.getItem(STORAGE_KEY);
  if (text === null) return [];
  try {
    const parsed = JSON.parse(text) as unknown;
    return Array.isArray(parsed) ? (parsed as SessionRecord[]) : [];
  } catch {
    return [];
  }
}

/**
 * Append one record to stored sessions. Returns "stored" on success or
 * "downloaded" after falling back; setItem gets one retry because quota
 * errors are often transient.
 */
export function persistSession(
  record: SessionRecord,
  storage: StorageLike,
  download: (text: string) => void,
): "stored" | "downloaded" {
  const sessions = loadStoredSessions(storage);
  sessions.push(record);
  const text = JSON.stringify(sessions);
  for (let attempt = 0; attempt < 2; attempt++) {
    try {
      storage.setItem(STORAGE_KEY, text);
      return "stored";
    } catch {
      // retry once, then fall through to the download path
    }
  }
  download(exportSessions([record]));
  return "downloaded";
}
