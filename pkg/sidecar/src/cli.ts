/**
 * Command line: thistle-sidecar <input> <output> --pooling {cls|mean|max}
 * --model <name>. Reads a text or vectorless corpus file, embeds every
 * record, writes a corpus file with vectors.
 */

import { parseInput, writeCorpus, OutputRecord } from "./corpus.js";
import { DEFAULT_MODEL, makeEncoder } from "./encoders.js";
import { parsePooling, poolTokens, Pooling } from "./pooling.js";

export interface CliOptions {
  input: string;
  output: string;
  pooling: Pooling;
  model: string;
}

export function parseArgs(argv: string[]): CliOptions {
  const positional: string[] = [];
  let pooling: Pooling = "mean";
  let model = DEFAULT_MODEL;
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--pooling") {
      pooling = parsePooling(argv[++i] ?? "");
    } else if (arg.startsWith("--pooling=")) {
      pooling = parsePooling(arg.slice("--pooling=".length));
    } else if (arg === "--model") {
      model = argv[++i] ?? "";
    } else if (arg.startsWith("--model=")) {
      model = arg.slice("--model=".length);
    } else if (arg === "--help" || arg === "-h") {
      throw new Error(
        "usage: thistle-sidecar <input> <output> --pooling {cls|mean|max} --model <name>",
      );
    } else if (arg.startsWith("--")) {
      throw new Error(`unknown flag: ${arg}`);
    } else {
      positional.push(arg);
    }
  }
  if (positional.length !== 2) {
    throw new Error(
      `expected <input> and <output> paths, got ${positional.length} positional arguments`,
    );
  }
  if (!model) {
    throw new Error("--model requires a value");
  }
  return { input: positional[0], output: positional[1], pooling, model };
}

export async function runCli(
  argv: string[],
  warn: (msg: string) => void = (msg) => console.error(`thistle-sidecar: warning: ${msg}`),
): Promise<void> {
  const options = parseArgs(argv);
  const records = parseInput(options.input);
  const encoder = makeEncoder(options.model);
  const out: OutputRecord[] = [];
  let dim: number | null = null;
  for (const rec of records) {
    const tokens = await encoder.encode(rec.text, (msg) => warn(`${rec.id}: ${msg}`));
    const vector = poolTokens(tokens, options.pooling);
    if (dim === null) {
      dim = vector.length;
    } else if (vector.length !== dim) {
      throw new Error(`record '${rec.id}': dim ${vector.length} != ${dim}`);
    }
    out.push({ id: rec.id, text: rec.text, vector });
  }
  writeCorpus(out, options.output);
}
