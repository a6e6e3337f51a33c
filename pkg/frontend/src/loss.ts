/**
 * In-batch + hard-negative contrastive loss.
 *
 * For question i with positive p_i: loss_i = -log softmax(q_i . d_j)[j = i],
 * where d ranges over all B positives plus the hard negatives in the batch
 * (every other question's documents serve as in-batch negatives).
 */

import { Tensor, backward, matmulT } from "./tensor.js";

export interface LossOptions {
  /** Include OTHER questions' hard negatives in each softmax (DPR convention). */
  shareHardNegatives?: boolean;
}

/**
 * qVecs: B x dim. docVecs: (B positives followed by H hard negatives) x dim,
 * H in {0, B}. Returns a scalar tensor (mean over questions).
 */
export function contrastiveLoss(qVecs: Tensor, docVecs: Tensor, options: LossOptions = {}): Tensor {
  const share = options.shareHardNegatives ?? true;
  const batch = qVecs.rows;
  if (qVecs.cols !== docVecs.cols) {
    throw new Error(`dim mismatch: questions ${qVecs.cols}, documents ${docVecs.cols}`);
  }
  if (docVecs.rows !== batch && docVecs.rows !== 2 * batch) {
    throw new Error(`expected ${batch} or ${2 * batch} document vectors, got ${docVecs.rows}`);
  }
  const hasNegatives = docVecs.rows === 2 * batch;
  const logits = matmulT(qVecs, docVecs); // B x docVecs.rows

  const out = new Tensor(1, 1, undefined, [logits], null);
  const n = logits.cols;
  const candidateCols: number[][] = [];
  const probs = new Float64Array(batch * n);
  let total = 0;
  for (let i = 0; i < batch; i++) {
    const cols: number[] = [];
    for (let j = 0; j < n; j++) {
      if (!share && hasNegatives && j >= batch && j !== batch + i) continue;
      cols.push(j);
    }
    candidateCols.push(cols);
    let max = -Infinity;
    for (const j of cols) max = Math.max(max, logits.data[i * n + j]);
    let sum = 0;
    for (const j of cols) sum += Math.exp(logits.data[i * n + j] - max);
    for (const j of cols) probs[i * n + j] = Math.exp(logits.data[i * n + j] - max) / sum;
    total += -Math.log(probs[i * n + i]);
  }
  out.data[0] = total / batch;
  out.backward_ = () => {
    const g = out.grad[0] / batch;
    for (let i = 0; i < batch; i++) {
      for (const j of candidateCols[i]) {
        logits.grad[i * n + j] += g * (probs[i * n + j] - (j === i ? 1 : 0));
      }
    }
  };
  return out;
}

/** Candidate count per question, for instrumentation tests. */
export function candidatesPerQuestion(batch: number, hasHardNegatives: boolean, share = true): number {
  if (!hasHardNegatives) return batch;
  return share ? 2 * batch : batch + 1;
}

export { backward };
