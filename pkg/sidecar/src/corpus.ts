/**
 * Input/output for corpus files.
 *
 * Input is either a plain text file (one passage per line, ids assigned from
 * line numbers) or a JSON Lines corpus whose records carry id/text but no
 * vectors yet. Output is always a JSON Lines corpus with id, text and vector
 * per record, which is exactly what the store's ingest expects.
 */

import { readFileSync, writeFileSync } from "node:fs";

export interface InputRecord {
  id: string;
  text: string;
}

export interface OutputRecord extends InputRecord {
  vector: number[];
}

export function parseInput(path: string): InputRecord[] {
  const raw = readFileSync(path, "utf-8");
  const lines = raw.split("\n");
  const firstContent = lines.find((line) => line.trim().length > 0);
  const jsonMode = firstContent !== undefined && firstContent.trim().startsWith("{");
  const records: InputRecord[] = [];
  const seen = new Set<string>();
  lines.forEach((line, index) => {
    if (line.trim().length === 0) return;
    const lineno = index + 1;
    if (jsonMode) {
      let obj: unknown;
      try {
        obj = JSON.parse(line);
      } catch (err) {
        throw new Error(`line ${lineno}: invalid record: ${err}`);
      }
      const rec = obj as Record<string, unknown>;
      if (typeof rec.id !== "string" || rec.id.length === 0) {
        throw new Error(`line ${lineno}: missing or empty 'id' field`);
      }
      if (seen.has(rec.id)) {
        throw new Error(`line ${lineno}: duplicate id '${rec.id}'`);
      }
      seen.add(rec.id);
      const text = typeof rec.text === "string" ? rec.text : "";
      records.push({ id: rec.id, text });
    } else {
      records.push({ id: `line-${String(lineno).padStart(6, "0")}`, text: line });
    }
  });
  return records;
}

export function writeCorpus(records: OutputRecord[], path: string): void {
  const body = records
    .map((rec) => JSON.stringify({ id: rec.id, text: rec.text, vector: rec.vector }))
    .join("\n");
  writeFileSync(path, records.length > 0 ? body + "\n" : "", "utf-8");
}
