/**
 * Reduce per-token vectors to one sentence vector.
 *
 * - cls:  the first row (encoders emit their begin-of-sequence token first)
 * - mean: element-wise average over tokens
 * - max:  element-wise max over tokens
 */

export type Pooling = "cls" | "mean" | "max";

export const POOLING_MODES: Pooling[] = ["cls", "mean", "max"];

export function poolTokens(tokens: number[][], mode: Pooling): number[] {
  if (tokens.length === 0) {
    throw new Error("cannot pool an empty token sequence");
  }
  const dim = tokens[0].length;
  for (const row of tokens) {
    if (row.length !== dim) {
      throw new Error(`ragged token matrix: expected width ${dim}, got ${row.length}`);
    }
  }
  if (mode === "cls") {
    return [...tokens[0]];
  }
  if (mode === "mean") {
    const out = new Array<number>(dim).fill(0);
    for (const row of tokens) {
      for (let i = 0; i < dim; i++) out[i] += row[i];
    }
    for (let i = 0; i < dim; i++) out[i] /= tokens.length;
    return out;
  }
  if (mode === "max") {
    const out = [...tokens[0]];
    for (const row of tokens.slice(1)) {
      for (let i = 0; i < dim; i++) {
        if (row[i] > out[i]) out[i] = row[i];
      }
    }
    return out;
  }
  throw new Error(`unknown pooling mode: ${mode}`);
}

export function parsePooling(raw: string): Pooling {
  if ((POOLING_MODES as string[]).includes(raw)) return raw as Pooling;
  throw new Error(`--pooling must be one of ${POOLING_MODES.join("|")}, got '${raw}'`);
}
