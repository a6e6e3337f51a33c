/**
 * encoder-lab command line: train a bi/tri encoder on mined triples and
 * export document/question embeddings in the EMB1 interchange format.
 *
 * Usage:
 *   encoder-lab train --samples s.jsonl --corpus c.jsonl [--corpus c2.jsonl ...]
 *     [--arch bi|tri] [--layers N] [--hidden N] [--heads N] [--buckets N]
 *     [--max-seq N] [--table-position-features] [--lr X] [--batch N]
 *     [--epochs N] [--steps N] [--seed N] [--no-shared-negatives]
 *     [--out-docs docs.emb1] [--out-queries q.emb1 --queries q.jsonl]
 *     [--loss-curve curve.json]
 */

import * as fs from "node:fs";

import { defaultTrainConfig } from "./adam.js";
import { encodeEmb1 } from "./emb1.js";
import { DEFAULT_ENCODER_CONFIG, EncoderConfig } from "./encoder.js";
import { exportDocVectors, exportQuestionVectors, loadCorpus, loadTrainingSamples, train } from "./train.js";

interface Flags {
  [key: string]: string | boolean | string[];
}

function parseArgs(argv: string[]): { command: string; flags: Flags } {
  const command = argv[0];
  const flags: Flags = {};
  for (let i = 1; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) throw new Error(`unexpected argument ${arg}`);
    const name = arg.slice(2);
    if (name === "table-position-features" || name === "no-shared-negatives") {
      flags[name] = true;
      continue;
    }
    const value = argv[++i];
    if (value === undefined) throw new Error(`flag --${name} needs a value`);
    if (name === "corpus") {
      const list = (flags[name] as string[]) ?? [];
      list.push(value);
      flags[name] = list;
    } else {
      flags[name] = value;
    }
  }
  return { command, flags };
}

function intFlag(flags: Flags, name: string, fallback: number): number {
  const raw = flags[name];
  if (raw === undefined) return fallback;
  const value = Number(raw);
  if (!Number.isInteger(value) || value <= 0) throw new Error(`--${name} must be a positive integer`);
  return value;
}

function floatFlag(flags: Flags, name: string, fallback: number): number {
  const raw = flags[name];
  if (raw === undefined) return fallback;
  const value = Number(raw);
  if (!Number.isFinite(value) || value <= 0) throw new Error(`--${name} must be a positive number`);
  return value;
}

export function runTrain(flags: Flags): void {
  const samplesPath = flags["samples"];
  const corpusPaths = flags["corpus"] as string[] | undefined;
  if (typeof samplesPath !== "string") throw new Error("--samples is required");
  if (!corpusPaths || corpusPaths.length === 0) throw new Error("at least one --corpus is required");

  const arch = (flags["arch"] as string) ?? DEFAULT_ENCODER_CONFIG.arch;
  if (arch !== "bi" && arch !== "tri") throw new Error("--arch must be bi or tri");
  const encoderConfig: EncoderConfig = {
    arch,
    layers: intFlag(flags, "layers", DEFAULT_ENCODER_CONFIG.layers),
    hiddenDim: intFlag(flags, "hidden", DEFAULT_ENCODER_CONFIG.hiddenDim),
    heads: intFlag(flags, "heads", DEFAULT_ENCODER_CONFIG.heads),
    vocabBuckets: intFlag(flags, "buckets", DEFAULT_ENCODER_CONFIG.vocabBuckets),
    maxSeqLen: intFlag(flags, "max-seq", DEFAULT_ENCODER_CONFIG.maxSeqLen),
    tablePositionFeatures: flags["table-position-features"] === true,
  };
  const base = defaultTrainConfig(arch);
  const trainConfig = {
    ...base,
    learningRate: floatFlag(flags, "lr", base.learningRate),
    batchSize: intFlag(flags, "batch", base.batchSize),
    epochs: intFlag(flags, "epochs", base.epochs),
    seed: flags["seed"] !== undefined ? Number(flags["seed"]) >>> 0 : base.seed,
    shareHardNegatives: flags["no-shared-negatives"] !== true,
  };
  const maxSteps = flags["steps"] !== undefined ? intFlag(flags, "steps", 0) : undefined;

  const docs = loadCorpus(corpusPaths);
  const samples = loadTrainingSamples(samplesPath);
  const result = train(samples, docs, encoderConfig, trainConfig, maxSteps);

  const first = result.lossCurve[0].loss;
  const last = result.lossCurve[result.lossCurve.length - 1].loss;
  console.error(`trained ${result.lossCurve.length} steps; loss ${first.toFixed(4)} -> ${last.toFixed(4)}`);

  if (typeof flags["loss-curve"] === "string") {
    fs.writeFileSync(flags["loss-curve"], JSON.stringify(result.lossCurve, null, 2) + "\n");
  }
  if (typeof flags["out-docs"] === "string") {
    const { ids, vectors } = exportDocVectors(result.stack, [...docs.values()]);
    fs.writeFileSync(flags["out-docs"], encodeEmb1({ dim: encoderConfig.hiddenDim, ids, vectors }));
    console.error(`wrote ${ids.length} document vectors to ${flags["out-docs"]}`);
  }
  if (typeof flags["out-queries"] === "string") {
    const queriesPath = flags["queries"];
    if (typeof queriesPath !== "string") throw new Error("--out-queries requires --queries");
    const queries = fs
      .readFileSync(queriesPath, "utf-8")
      .split("\n")
      .filter((line) => line.trim())
      .map((line) => {
        const obj = JSON.parse(line);
        return { id: String(obj.query_id ?? obj.id), question: String(obj.question) };
      });
    const { ids, vectors } = exportQuestionVectors(result.stack, queries);
    fs.writeFileSync(flags["out-queries"], encodeEmb1({ dim: encoderConfig.hiddenDim, ids, vectors }));
    console.error(`wrote ${ids.length} question vectors to ${flags["out-queries"]}`);
  }
}

export function main(argv: string[]): number {
  try {
    const { command, flags } = parseArgs(argv);
    if (command === "train") {
      runTrain(flags);
      return 0;
    }
    throw new Error(command ? `unknown command ${command}` : "usage: encoder-lab train [flags]");
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

if (process.argv[1] && /cli\.(ts|js)$/.test(process.argv[1])) {
  process.exit(main(process.argv.slice(2)));
}
