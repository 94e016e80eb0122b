/**
 * Text-to-token-vector encoders. Every encoder returns one vector per token;
 * pooling happens downstream so cls/mean/max behave identically across
 * encoders.
 *
 * Two backends:
 *  - TransformerEncoder: a sentence-transformer checkpoint via
 *    @huggingface/transformers (default Xenova/all-mpnet-base-v2, 768-d).
 *    Needs the model available locally or downloadable.
 *  - HashEncoder ("local-hash"): a dependency-free feature-hashing encoder.
 *    Each whitespace token maps to a pseudo-random unit-range vector seeded
 *    by the token's bytes, so output is bit-stable across runs and machines.
 *    No context: cls pooling reduces to the first token's vector.
 */

export const DEFAULT_MODEL = "Xenova/all-mpnet-base-v2";
export const HASH_MODEL = "local-hash";
export const HASH_DIM = 768;
export const MAX_TOKENS = 512;

export interface Encoder {
  readonly name: string;
  readonly dim: number;
  /** Token vectors for one passage; emits a warning when input is truncated. */
  encode(text: string, warn: (msg: string) => void): Promise<number[][]>;
}

const FNV_OFFSET = 0xcbf29ce484222325n;
const FNV_PRIME = 0x100000001b3n;
const MASK64 = (1n << 64n) - 1n;

function fnv1a64(text: string): bigint {
  let hash = FNV_OFFSET;
  const bytes = Buffer.from(text, "utf-8");
  for (const byte of bytes) {
    hash ^= BigInt(byte);
    hash = (hash * FNV_PRIME) & MASK64;
  }
  return hash;
}

/** xorshift64* over a 64-bit state; maps each step to a float in [-1, 1). */
function* hashStream(seed: bigint): Generator<number> {
  let state = seed === 0n ? 0x9e3779b97f4a7c15n : seed;
  while (true) {
    state = (state ^ (state >> 12n)) & MASK64;
    state = (state ^ (state << 25n)) & MASK64;
    state = (state ^ (state >> 27n)) & MASK64;
    const mixed = (state * 0x2545f4914f6cdd1dn) & MASK64;
    // top 53 bits -> [0, 1) -> [-1, 1)
    yield Number(mixed >> 11n) / 2 ** 53 * 2 - 1;
  }
}

export function hashTokenVector(token: string, dim: number): number[] {
  const stream = hashStream(fnv1a64(token));
  const out = new Array<number>(dim);
  for (let i = 0; i < dim; i++) out[i] = stream.next().value as number;
  return out;
}

export class HashEncoder implements Encoder {
  readonly name = HASH_MODEL;
  readonly dim: number;
  private cache = new Map<string, number[]>();

  constructor(dim: number = HASH_DIM) {
    this.dim = dim;
  }

  async encode(text: string, warn: (msg: string) => void): Promise<number[][]> {
    let tokens = text.split(/\s+/).filter((t) => t.length > 0);
    if (tokens.length === 0) {
      tokens = ["<empty>"];
    }
    if (tokens.length > MAX_TOKENS) {
      warn(`passage truncated from ${tokens.length} to ${MAX_TOKENS} tokens`);
      tokens = tokens.slice(0, MAX_TOKENS);
    }
    return tokens.map((token) => {
      let vec = this.cache.get(token);
      if (!vec) {
        vec = hashTokenVector(token, this.dim);
        this.cache.set(token, vec);
      }
      return vec;
    });
  }
}

export class TransformerEncoder implements Encoder {
  readonly name: string;
  dim = 0;
  private pipe: any = null;

  constructor(model: string = DEFAULT_MODEL) {
    this.name = model;
  }

  private async init(): Promise<void> {
    if (this.pipe) return;
    let pipeline: any;
    // optional dependency: resolved at runtime so the offline encoder works
    // without it
    const moduleName = "@huggingface/transformers";
    try {
      ({ pipeline } = await import(moduleName));
    } catch (err) {
      throw new Error(
        `model backend unavailable (install ${moduleName} or use --model ${HASH_MODEL}): ${err}`,
      );
    }
    this.pipe = await pipeline("feature-extraction", this.name);
  }

  async encode(text: string, warn: (msg: string) => void): Promise<number[][]> {
    await this.init();
    const maxLen = this.pipe.tokenizer?.model_max_length;
    if (typeof maxLen === "number" && maxLen > 0) {
      const probe = this.pipe.tokenizer(text);
      const count = probe.input_ids?.size ?? 0;
      if (count > maxLen) {
        warn(`passage truncated from ${count} to ${maxLen} tokens`);
      }
    }
    // pooling 'none' keeps the per-token hidden states, special tokens first
    const output = await this.pipe(text, { pooling: "none" });
    const [, tokens, dim] = output.dims as [number, number, number];
    this.dim = dim;
    const flat = Array.from(output.data as Float32Array);
    const rows: number[][] = [];
    for (let t = 0; t < tokens; t++) {
      rows.push(flat.slice(t * dim, (t + 1) * dim));
    }
    return rows;
  }
}

export function makeEncoder(model: string): Encoder {
  if (model === HASH_MODEL || model === "hash") {
    return new HashEncoder();
  }
  return new TransformerEncoder(model);
}
