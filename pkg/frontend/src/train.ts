/**
 * Training loop: batches of (question, positive doc, hard-negative doc)
 * triples, contrastive loss over in-batch plus hard negatives, Adam with
 * warmup/decay. Deterministic for a fixed seed.
 */

import * as fs from "node:fs";

import { Adam, TrainConfig, scheduledLr, zeroGrads } from "./adam.js";
import { Doc, parseDocLine } from "./documents.js";
import { EncoderConfig, EncoderStack } from "./encoder.js";
import { backward, contrastiveLoss } from "./loss.js";
import { Rng } from "./rng.js";
import { Tensor, stackRows } from "./tensor.js";

export interface TrainingSample {
  question: string;
  positiveId: string;
  hardNegativeId: string;
}

export interface LossPoint {
  step: number;
  loss: number;
}

export function loadCorpus(paths: string[]): Map<string, Doc> {
  const docs = new Map<string, Doc>();
  for (const path of paths) {
    for (const line of fs.readFileSync(path, "utf-8").split("\n")) {
      if (!line.trim()) continue;
      const doc = parseDocLine(line);
      if (docs.has(doc.id)) throw new Error(`duplicate document id ${doc.id}`);
      docs.set(doc.id, doc);
    }
  }
  return docs;
}

export function loadTrainingSamples(path: string): TrainingSample[] {
  const samples: TrainingSample[] = [];
  for (const line of fs.readFileSync(path, "utf-8").split("\n")) {
    if (!line.trim()) continue;
    const obj = JSON.parse(line);
    samples.push({
      question: String(obj.question),
      positiveId: String(obj.positive_id),
      hardNegativeId: String(obj.hard_negative_id),
    });
  }
  return samples;
}

export interface TrainResult {
  stack: EncoderStack;
  lossCurve: LossPoint[];
  skippedSamples: number;
}

export function train(
  samples: TrainingSample[],
  docs: Map<string, Doc>,
  encoderConfig: EncoderConfig,
  trainConfig: TrainConfig,
  maxSteps?: number,
): TrainResult {
  if (trainConfig.batchSize < 2) throw new Error("batch size must be at least 2 for in-batch negatives");
  const usable: TrainingSample[] = [];
  let skipped = 0;
  for (const sample of samples) {
    if (docs.has(sample.positiveId) && docs.has(sample.hardNegativeId)) usable.push(sample);
    else skipped++;
  }
  if (skipped > 0) console.error(`skipping ${skipped} samples with missing document ids`);
  if (usable.length < trainConfig.batchSize) {
    throw new Error(`need at least one full batch (${trainConfig.batchSize}), have ${usable.length} samples`);
  }

  const stack = new EncoderStack(encoderConfig, trainConfig.seed);
  const params = stack.params();
  const adam = new Adam();
  const rng = new Rng(trainConfig.seed ^ 0x5eed);

  const batchesPerEpoch = Math.floor(usable.length / trainConfig.batchSize);
  const totalSteps = maxSteps ?? batchesPerEpoch * trainConfig.epochs;
  const lossCurve: LossPoint[] = [];

  let step = 0;
  outer: for (let epoch = 0; epoch < Math.ceil(totalSteps / batchesPerEpoch); epoch++) {
    const order = usable.map((_, i) => i);
    rng.shuffle(order);
    for (let b = 0; b < batchesPerEpoch; b++) {
      if (step >= totalSteps) break outer;
      const batch = order.slice(b * trainConfig.batchSize, (b + 1) * trainConfig.batchSize).map((i) => usable[i]);
      zeroGrads(params);
      const qRows: Tensor[] = batch.map((s) => stack.encodeQuestion(s.question));
      const posRows: Tensor[] = batch.map((s) => stack.encodeDoc(docs.get(s.positiveId)!));
      const negRows: Tensor[] = batch.map((s) => stack.encodeDoc(docs.get(s.hardNegativeId)!));
      const loss = contrastiveLoss(stackRows(qRows), stackRows([...posRows, ...negRows]), {
        shareHardNegatives: trainConfig.shareHardNegatives,
      });
      backward(loss);
      adam.step(params, scheduledLr(trainConfig.learningRate, step, totalSteps, trainConfig.warmupFraction));
      lossCurve.push({ step, loss: loss.data[0] });
      step++;
    }
  }
  return { stack, lossCurve, skippedSamples: skipped };
}

/** Encode every corpus document through its routed encoder; float32 rows for EMB1. */
export function exportDocVectors(stack: EncoderStack, docs: Doc[]): { ids: string[]; vectors: Float32Array[] } {
  const ids: string[] = [];
  const vectors: Float32Array[] = [];
  for (const doc of docs) {
    const vec = stack.encodeDoc(doc);
    for (const value of vec.data) {
      if (!Number.isFinite(value)) throw new Error(`non-finite embedding for document ${doc.id}`);
    }
    ids.push(doc.id);
    vectors.push(Float32Array.from(vec.data));
  }
  return { ids, vectors };
}

export function exportQuestionVectors(stack: EncoderStack, questions: { id: string; question: string }[]) {
  const ids: string[] = [];
  const vectors: Float32Array[] = [];
  for (const q of questions) {
    const vec = stack.encodeQuestion(q.question);
    for (const value of vec.data) {
      if (!Number.isFinite(value)) throw new Error(`non-finite embedding for question ${q.id}`);
    }
    ids.push(q.id);
    vectors.push(Float32Array.from(vec.data));
  }
  return { ids, vectors };
}
