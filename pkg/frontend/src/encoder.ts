/**
 * Tiny transformer encoder with a hash-bucket vocabulary.
 *
 * The leading position carries a [CLS]-like marker token; its final hidden
 * state is the sequence representation. Tables may additionally receive
 * additive row-id and column-id embeddings (2-D structure features).
 */

import { Doc, PositionedToken, tokenize, tokenizeDoc } from "./documents.js";
import { Rng } from "./rng.js";
import {
  Tensor,
  add,
  addRow,
  concatCols,
  gatherRows,
  gelu,
  layerNorm,
  matmul,
  matmulT,
  scale,
  sliceCols,
  sliceRow,
  softmaxRows,
} from "./tensor.js";

export type Arch = "bi" | "tri";
export type Slot = "question" | "document" | "text" | "table";

export interface EncoderConfig {
  arch: Arch;
  layers: number;
  hiddenDim: number;
  heads: number;
  vocabBuckets: number;
  maxSeqLen: number;
  tablePositionFeatures: boolean;
}

export const DEFAULT_ENCODER_CONFIG: EncoderConfig = {
  arch: "tri",
  layers: 2,
  hiddenDim: 128,
  heads: 4,
  vocabBuckets: 2048,
  maxSeqLen: 64,
  tablePositionFeatures: false,
};

const MAX_ROW_BUCKETS = 32;
const MAX_COL_BUCKETS = 16;
const CLS_BUCKET = 0; // bucket 0 is reserved for the leading marker token

export function hashBucket(token: string, buckets: number): number {
  let h = 0x811c9dc5;
  for (const byte of Buffer.from(token, "utf-8")) {
    h ^= byte;
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  // buckets - 1 usable ids; 0 is the marker
  return 1 + (h % (buckets - 1));
}

export interface Param {
  name: string;
  tensor: Tensor;
}

function initTensor(rows: number, cols: number, rng: Rng, std: number): Tensor {
  const t = Tensor.zeros(rows, cols);
  for (let i = 0; i < t.data.length; i++) t.data[i] = rng.normal() * std;
  return t;
}

class EncoderLayer {
  wq: Tensor; wk: Tensor; wv: Tensor; wo: Tensor;
  bq: Tensor; bk: Tensor; bv: Tensor; bo: Tensor;
  ln1Gain: Tensor; ln1Bias: Tensor;
  w1: Tensor; b1: Tensor; w2: Tensor; b2: Tensor;
  ln2Gain: Tensor; ln2Bias: Tensor;

  constructor(dim: number, rng: Rng) {
    const std = 0.08;
    this.wq = initTensor(dim, dim, rng, std);
    this.wk = initTensor(dim, dim, rng, std);
    this.wv = initTensor(dim, dim, rng, std);
    this.wo = initTensor(dim, dim, rng, std);
    this.bq = Tensor.zeros(1, dim);
    this.bk = Tensor.zeros(1, dim);
    this.bv = Tensor.zeros(1, dim);
    this.bo = Tensor.zeros(1, dim);
    this.ln1Gain = Tensor.from(1, dim, new Array(dim).fill(1));
    this.ln1Bias = Tensor.zeros(1, dim);
    this.w1 = initTensor(dim, 2 * dim, rng, std);
    this.b1 = Tensor.zeros(1, 2 * dim);
    this.w2 = initTensor(2 * dim, dim, rng, std);
    this.b2 = Tensor.zeros(1, dim);
    this.ln2Gain = Tensor.from(1, dim, new Array(dim).fill(1));
    this.ln2Bias = Tensor.zeros(1, dim);
  }

  params(prefix: string): Param[] {
    return Object.entries({
      wq: this.wq, wk: this.wk, wv: this.wv, wo: this.wo,
      bq: this.bq, bk: this.bk, bv: this.bv, bo: this.bo,
      ln1Gain: this.ln1Gain, ln1Bias: this.ln1Bias,
      w1: this.w1, b1: this.b1, w2: this.w2, b2: this.b2,
      ln2Gain: this.ln2Gain, ln2Bias: this.ln2Bias,
    }).map(([name, tensor]) => ({ name: `${prefix}.${name}`, tensor }));
  }

  forward(x: Tensor, heads: number): Tensor {
    const dim = x.cols;
    const headDim = dim / heads;
    const q = addRow(matmul(x, this.wq), this.bq);
    const k = addRow(matmul(x, this.wk), this.bk);
    const v = addRow(matmul(x, this.wv), this.bv);
    const headsOut: Tensor[] = [];
    for (let h = 0; h < heads; h++) {
      const qh = sliceCols(q, h * headDim, (h + 1) * headDim);
      const kh = sliceCols(k, h * headDim, (h + 1) * headDim);
      const vh = sliceCols(v, h * headDim, (h + 1) * headDim);
      const attn = softmaxRows(scale(matmulT(qh, kh), 1 / Math.sqrt(headDim)));
      headsOut.push(matmul(attn, vh));
    }
    const attended = addRow(matmul(concatCols(headsOut), this.wo), this.bo);
    const x1 = layerNorm(add(x, attended), this.ln1Gain, this.ln1Bias);
    const ffn = addRow(matmul(gelu(addRow(matmul(x1, this.w1), this.b1)), this.w2), this.b2);
    return layerNorm(add(x1, ffn), this.ln2Gain, this.ln2Bias);
  }
}

export class Encoder {
  readonly config: EncoderConfig;
  readonly tokenEmb: Tensor;
  readonly posEmb: Tensor;
  readonly rowEmb: Tensor | null;
  readonly colEmb: Tensor | null;
  readonly layers: EncoderLayer[];
  forwardCount = 0;

  constructor(config: EncoderConfig, rng: Rng, withTableFeatures: boolean) {
    if (config.hiddenDim % config.heads !== 0) throw new Error("hiddenDim must be divisible by heads");
    this.config = config;
    this.tokenEmb = initTensor(config.vocabBuckets, config.hiddenDim, rng, 0.1);
    this.posEmb = initTensor(config.maxSeqLen, config.hiddenDim, rng, 0.1);
    const useFeatures = withTableFeatures && config.tablePositionFeatures;
    this.rowEmb = useFeatures ? initTensor(MAX_ROW_BUCKETS, config.hiddenDim, rng, 0.1) : null;
    this.colEmb = useFeatures ? initTensor(MAX_COL_BUCKETS, config.hiddenDim, rng, 0.1) : null;
    this.layers = [];
    for (let l = 0; l < config.layers; l++) this.layers.push(new EncoderLayer(config.hiddenDim, rng));
  }

  params(prefix: string): Param[] {
    const out: Param[] = [
      { name: `${prefix}.tokenEmb`, tensor: this.tokenEmb },
      { name: `${prefix}.posEmb`, tensor: this.posEmb },
    ];
    if (this.rowEmb) out.push({ name: `${prefix}.rowEmb`, tensor: this.rowEmb });
    if (this.colEmb) out.push({ name: `${prefix}.colEmb`, tensor: this.colEmb });
    this.layers.forEach((layer, i) => out.push(...layer.params(`${prefix}.layer${i}`)));
    return out;
  }

  /** Encode positioned tokens; returns the leading position's hidden state (1 x dim). */
  encodeTokens(tokens: PositionedToken[]): Tensor {
    if (tokens.length === 0) throw new Error("cannot encode empty input");
    this.forwardCount++;
    const { vocabBuckets, maxSeqLen, heads } = this.config;
    const clipped = tokens.slice(0, maxSeqLen - 1);
    const buckets = [CLS_BUCKET, ...clipped.map((t) => hashBucket(t.token, vocabBuckets))];
    const positions = buckets.map((_, i) => i);
    let x = add(gatherRows(this.tokenEmb, buckets), gatherRows(this.posEmb, positions));
    if (this.rowEmb && this.colEmb) {
      const rowIds = [0, ...clipped.map((t) => Math.min(t.rowId, MAX_ROW_BUCKETS - 1))];
      const colIds = [0, ...clipped.map((t) => Math.min(t.colId, MAX_COL_BUCKETS - 1))];
      x = add(x, add(gatherRows(this.rowEmb, rowIds), gatherRows(this.colEmb, colIds)));
    }
    for (const layer of this.layers) x = layer.forward(x, heads);
    return sliceRow(x, 0);
  }

  encodeText(text: string): Tensor {
    const tokens = tokenize(text).map((token) => ({ token, rowId: 0, colId: 0 }));
    return this.encodeTokens(tokens);
  }
}

/** Bi- or tri-encoder bundle with modality routing. */
export class EncoderStack {
  readonly config: EncoderConfig;
  readonly encoders: Map<Slot, Encoder>;

  constructor(config: EncoderConfig, seed: number) {
    this.config = config;
    const rng = new Rng(seed);
    this.encoders = new Map();
    this.encoders.set("question", new Encoder(config, rng, false));
    if (config.arch === "bi") {
      this.encoders.set("document", new Encoder(config, rng, true));
    } else {
      this.encoders.set("text", new Encoder(config, rng, false));
      this.encoders.set("table", new Encoder(config, rng, true));
    }
  }

  /** Which encoder slot handles this document under the configured arch. */
  route(doc: Doc): Slot {
    if (this.config.arch === "bi") return "document";
    return doc.kind === "table" ? "table" : "text";
  }

  encodeQuestion(question: string): Tensor {
    return this.encoders.get("question")!.encodeText(question);
  }

  encodeDoc(doc: Doc): Tensor {
    return this.encoders.get(this.route(doc))!.encodeTokens(tokenizeDoc(doc));
  }

  params(): Param[] {
    const out: Param[] = [];
    for (const [slot, encoder] of this.encoders) out.push(...encoder.params(slot));
    return out;
  }

  paramCount(): number {
    return this.params().reduce((s, p) => s + p.tensor.data.length, 0);
  }

  forwardCounts(): Record<string, number> {
    const out: Record<string, number> = {};
    for (const [slot, encoder] of this.encoders) out[slot] = encoder.forwardCount;
    return out;
  }

  resetForwardCounts(): void {
    for (const encoder of this.encoders.values()) encoder.forwardCount = 0;
  }
}
