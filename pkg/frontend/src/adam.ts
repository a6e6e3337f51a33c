/** Adam with linear warmup (first 10% of steps) then linear decay to zero. */

import { Param } from "./encoder.js";

export interface TrainConfig {
  learningRate: number;
  warmupFraction: number;
  batchSize: number;
  epochs: number;
  seed: number;
  shareHardNegatives: boolean;
}

export function defaultTrainConfig(arch: "bi" | "tri"): TrainConfig {
  return {
    learningRate: 1e-5,
    warmupFraction: 0.1,
    batchSize: arch === "bi" ? 38 : 28,
    epochs: 10,
    seed: 0,
    shareHardNegatives: true,
  };
}

export function scheduledLr(baseLr: number, step: number, totalSteps: number, warmupFraction: number): number {
  const warmup = Math.max(1, Math.floor(totalSteps * warmupFraction));
  if (step < warmup) return (baseLr * (step + 1)) / warmup;
  if (totalSteps <= warmup) return baseLr;
  return baseLr * Math.max(0, (totalSteps - step) / (totalSteps - warmup));
}

export class Adam {
  private readonly beta1 = 0.9;
  private readonly beta2 = 0.999;
  private readonly eps = 1e-8;
  private readonly m = new Map<string, Float64Array>();
  private readonly v = new Map<string, Float64Array>();
  private t = 0;

  step(params: Param[], lr: number): void {
    this.t++;
    const correction1 = 1 - Math.pow(this.beta1, this.t);
    const correction2 = 1 - Math.pow(this.beta2, this.t);
    for (const { name, tensor } of params) {
      let m = this.m.get(name);
      let v = this.v.get(name);
      if (!m || !v) {
        m = new Float64Array(tensor.data.length);
        v = new Float64Array(tensor.data.length);
        this.m.set(name, m);
        this.v.set(name, v);
      }
      for (let i = 0; i < tensor.data.length; i++) {
        const g = tensor.grad[i];
        m[i] = this.beta1 * m[i] + (1 - this.beta1) * g;
        v[i] = this.beta2 * v[i] + (1 - this.beta2) * g * g;
        tensor.data[i] -= (lr * (m[i] / correction1)) / (Math.sqrt(v[i] / correction2) + this.eps);
      }
    }
  }
}

export function zeroGrads(params: Param[]): void {
  for (const { tensor } of params) tensor.grad.fill(0);
}
