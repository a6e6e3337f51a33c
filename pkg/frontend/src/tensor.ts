/**
 * Minimal reverse-mode autograd over 2-D float64 tensors.
 *
 * Only the ops the tiny transformer needs: matmul (plain and transposed),
 * elementwise add, row-broadcast add, GELU, row softmax, layer norm, row
 * gather (embedding lookup), column slice/concat and scaling.
 */

export type BackwardFn = () => void;

export class Tensor {
  readonly rows: number;
  readonly cols: number;
  readonly data: Float64Array;
  readonly grad: Float64Array;
  readonly parents: Tensor[];
  backward_: BackwardFn | null;

  constructor(rows: number, cols: number, data?: Float64Array, parents: Tensor[] = [], backward: BackwardFn | null = null) {
    this.rows = rows;
    this.cols = cols;
    this.data = data ?? new Float64Array(rows * cols);
    this.grad = new Float64Array(rows * cols);
    this.parents = parents;
    this.backward_ = backward;
    if (this.data.length !== rows * cols) throw new Error(`data length ${this.data.length} != ${rows}x${cols}`);
  }

  at(r: number, c: number): number {
    return this.data[r * this.cols + c];
  }

  static zeros(rows: number, cols: number): Tensor {
    return new Tensor(rows, cols);
  }

  static from(rows: number, cols: number, values: number[] | Float64Array): Tensor {
    return new Tensor(rows, cols, Float64Array.from(values));
  }
}

/** Topologically ordered backward pass from a scalar (1x1) tensor. */
export function backward(loss: Tensor): void {
  if (loss.rows !== 1 || loss.cols !== 1) throw new Error("backward expects a scalar tensor");
  const order: Tensor[] = [];
  const seen = new Set<Tensor>();
  const visit = (t: Tensor) => {
    if (seen.has(t)) return;
    seen.add(t);
    for (const p of t.parents) visit(p);
    order.push(t);
  };
  visit(loss);
  loss.grad[0] = 1;
  for (let i = order.length - 1; i >= 0; i--) {
    order[i].backward_?.();
  }
}

export function matmul(a: Tensor, b: Tensor): Tensor {
  if (a.cols !== b.rows) throw new Error(`matmul shape mismatch: ${a.cols} vs ${b.rows}`);
  const out = new Tensor(a.rows, b.cols, undefined, [a, b], null);
  for (let i = 0; i < a.rows; i++) {
    for (let k = 0; k < a.cols; k++) {
      const av = a.data[i * a.cols + k];
      if (av === 0) continue;
      for (let j = 0; j < b.cols; j++) {
        out.data[i * b.cols + j] += av * b.data[k * b.cols + j];
      }
    }
  }
  out.backward_ = () => {
    for (let i = 0; i < a.rows; i++) {
      for (let j = 0; j < b.cols; j++) {
        const g = out.grad[i * b.cols + j];
        if (g === 0) continue;
        for (let k = 0; k < a.cols; k++) {
          a.grad[i * a.cols + k] += g * b.data[k * b.cols + j];
          b.grad[k * b.cols + j] += g * a.data[i * a.cols + k];
        }
      }
    }
  };
  return out;
}

/** a @ b^T, for attention scores. */
export function matmulT(a: Tensor, b: Tensor): Tensor {
  if (a.cols !== b.cols) throw new Error(`matmulT shape mismatch: ${a.cols} vs ${b.cols}`);
  const out = new Tensor(a.rows, b.rows, undefined, [a, b], null);
  for (let i = 0; i < a.rows; i++) {
    for (let j = 0; j < b.rows; j++) {
      let s = 0;
      for (let k = 0; k < a.cols; k++) s += a.data[i * a.cols + k] * b.data[j * b.cols + k];
      out.data[i * b.rows + j] = s;
    }
  }
  out.backward_ = () => {
    for (let i = 0; i < a.rows; i++) {
      for (let j = 0; j < b.rows; j++) {
        const g = out.grad[i * b.rows + j];
        if (g === 0) continue;
        for (let k = 0; k < a.cols; k++) {
          a.grad[i * a.cols + k] += g * b.data[j * b.cols + k];
          b.grad[j * b.cols + k] += g * a.data[i * a.cols + k];
        }
      }
    }
  };
  return out;
}

export function add(a: Tensor, b: Tensor): Tensor {
  if (a.rows !== b.rows || a.cols !== b.cols) throw new Error("add shape mismatch");
  const out = new Tensor(a.rows, a.cols, undefined, [a, b], null);
  for (let i = 0; i < out.data.length; i++) out.data[i] = a.data[i] + b.data[i];
  out.backward_ = () => {
    for (let i = 0; i < out.data.length; i++) {
      a.grad[i] += out.grad[i];
      b.grad[i] += out.grad[i];
    }
  };
  return out;
}

/** Add a 1-row bias to every row of a. */
export function addRow(a: Tensor, bias: Tensor): Tensor {
  if (bias.rows !== 1 || bias.cols !== a.cols) throw new Error("addRow shape mismatch");
  const out = new Tensor(a.rows, a.cols, undefined, [a, bias], null);
  for (let i = 0; i < a.rows; i++) {
    for (let j = 0; j < a.cols; j++) out.data[i * a.cols + j] = a.data[i * a.cols + j] + bias.data[j];
  }
  out.backward_ = () => {
    for (let i = 0; i < a.rows; i++) {
      for (let j = 0; j < a.cols; j++) {
        a.grad[i * a.cols + j] += out.grad[i * a.cols + j];
        bias.grad[j] += out.grad[i * a.cols + j];
      }
    }
  };
  return out;
}

export function scale(a: Tensor, s: number): Tensor {
  const out = new Tensor(a.rows, a.cols, undefined, [a], null);
  for (let i = 0; i < a.data.length; i++) out.data[i] = a.data[i] * s;
  out.backward_ = () => {
    for (let i = 0; i < a.data.length; i++) a.grad[i] += out.grad[i] * s;
  };
  return out;
}

const GELU_C = Math.sqrt(2 / Math.PI);

/** Smooth tanh-approximation GELU. */
export function gelu(a: Tensor): Tensor {
  const out = new Tensor(a.rows, a.cols, undefined, [a], null);
  for (let i = 0; i < a.data.length; i++) {
    const x = a.data[i];
    out.data[i] = 0.5 * x * (1 + Math.tanh(GELU_C * (x + 0.044715 * x * x * x)));
  }
  out.backward_ = () => {
    for (let i = 0; i < a.data.length; i++) {
      const x = a.data[i];
      const inner = GELU_C * (x + 0.044715 * x * x * x);
      const t = Math.tanh(inner);
      const dInner = GELU_C * (1 + 3 * 0.044715 * x * x);
      const d = 0.5 * (1 + t) + 0.5 * x * (1 - t * t) * dInner;
      a.grad[i] += out.grad[i] * d;
    }
  };
  return out;
}

export function softmaxRows(a: Tensor): Tensor {
  const out = new Tensor(a.rows, a.cols, undefined, [a], null);
  for (let i = 0; i < a.rows; i++) {
    let max = -Infinity;
    for (let j = 0; j < a.cols; j++) max = Math.max(max, a.data[i * a.cols + j]);
    let sum = 0;
    for (let j = 0; j < a.cols; j++) {
      const e = Math.exp(a.data[i * a.cols + j] - max);
      out.data[i * a.cols + j] = e;
      sum += e;
    }
    for (let j = 0; j < a.cols; j++) out.data[i * a.cols + j] /= sum;
  }
  out.backward_ = () => {
    for (let i = 0; i < a.rows; i++) {
      let dot = 0;
      for (let j = 0; j < a.cols; j++) dot += out.grad[i * a.cols + j] * out.data[i * a.cols + j];
      for (let j = 0; j < a.cols; j++) {
        const y = out.data[i * a.cols + j];
        a.grad[i * a.cols + j] += y * (out.grad[i * a.cols + j] - dot);
      }
    }
  };
  return out;
}

const LN_EPS = 1e-5;

/** Per-row layer norm with learned gain and bias (both 1 x cols). */
export function layerNorm(a: Tensor, gain: Tensor, bias: Tensor): Tensor {
  const out = new Tensor(a.rows, a.cols, undefined, [a, gain, bias], null);
  const n = a.cols;
  const means = new Float64Array(a.rows);
  const invStds = new Float64Array(a.rows);
  for (let i = 0; i < a.rows; i++) {
    let mean = 0;
    for (let j = 0; j < n; j++) mean += a.data[i * n + j];
    mean /= n;
    let varSum = 0;
    for (let j = 0; j < n; j++) {
      const d = a.data[i * n + j] - mean;
      varSum += d * d;
    }
    const invStd = 1 / Math.sqrt(varSum / n + LN_EPS);
    means[i] = mean;
    invStds[i] = invStd;
    for (let j = 0; j < n; j++) {
      out.data[i * n + j] = gain.data[j] * (a.data[i * n + j] - mean) * invStd + bias.data[j];
    }
  }
  out.backward_ = () => {
    for (let i = 0; i < a.rows; i++) {
      const invStd = invStds[i];
      let sumG = 0;
      let sumGx = 0;
      for (let j = 0; j < n; j++) {
        const xhat = (a.data[i * n + j] - means[i]) * invStd;
        const g = out.grad[i * n + j] * gain.data[j];
        sumG += g;
        sumGx += g * xhat;
        gain.grad[j] += out.grad[i * n + j] * xhat;
        bias.grad[j] += out.grad[i * n + j];
      }
      for (let j = 0; j < n; j++) {
        const xhat = (a.data[i * n + j] - means[i]) * invStd;
        const g = out.grad[i * n + j] * gain.data[j];
        a.grad[i * n + j] += invStd * (g - sumG / n - xhat * (sumGx / n));
      }
    }
  };
  return out;
}

/** Gather rows of an embedding table; gradient scatter-adds back. */
export function gatherRows(table: Tensor, indices: number[]): Tensor {
  const out = new Tensor(indices.length, table.cols, undefined, [table], null);
  for (let i = 0; i < indices.length; i++) {
    const r = indices[i];
    if (r < 0 || r >= table.rows) throw new Error(`gather index ${r} out of range`);
    out.data.set(table.data.subarray(r * table.cols, (r + 1) * table.cols), i * table.cols);
  }
  out.backward_ = () => {
    for (let i = 0; i < indices.length; i++) {
      const r = indices[i];
      for (let j = 0; j < table.cols; j++) {
        table.grad[r * table.cols + j] += out.grad[i * table.cols + j];
      }
    }
  };
  return out;
}

export function sliceCols(a: Tensor, start: number, end: number): Tensor {
  const w = end - start;
  const out = new Tensor(a.rows, w, undefined, [a], null);
  for (let i = 0; i < a.rows; i++) {
    out.data.set(a.data.subarray(i * a.cols + start, i * a.cols + end), i * w);
  }
  out.backward_ = () => {
    for (let i = 0; i < a.rows; i++) {
      for (let j = 0; j < w; j++) a.grad[i * a.cols + start + j] += out.grad[i * w + j];
    }
  };
  return out;
}

export function concatCols(parts: Tensor[]): Tensor {
  const rows = parts[0].rows;
  const cols = parts.reduce((s, p) => s + p.cols, 0);
  const out = new Tensor(rows, cols, undefined, parts, null);
  let offset = 0;
  for (const p of parts) {
    if (p.rows !== rows) throw new Error("concatCols row mismatch");
    for (let i = 0; i < rows; i++) {
      out.data.set(p.data.subarray(i * p.cols, (i + 1) * p.cols), i * cols + offset);
    }
    offset += p.cols;
  }
  out.backward_ = () => {
    let off = 0;
    for (const p of parts) {
      for (let i = 0; i < rows; i++) {
        for (let j = 0; j < p.cols; j++) p.grad[i * p.cols + j] += out.grad[i * cols + off + j];
      }
      off += p.cols;
    }
  };
  return out;
}

export function sliceRow(a: Tensor, row: number): Tensor {
  const out = new Tensor(1, a.cols, undefined, [a], null);
  out.data.set(a.data.subarray(row * a.cols, (row + 1) * a.cols));
  out.backward_ = () => {
    for (let j = 0; j < a.cols; j++) a.grad[row * a.cols + j] += out.grad[j];
  };
  return out;
}

/** Stack 1-row tensors into one matrix. */
export function stackRows(rows: Tensor[]): Tensor {
  const cols = rows[0].cols;
  const out = new Tensor(rows.length, cols, undefined, rows, null);
  for (let i = 0; i < rows.length; i++) {
    if (rows[i].rows !== 1 || rows[i].cols !== cols) throw new Error("stackRows expects 1-row tensors of equal width");
    out.data.set(rows[i].data, i * cols);
  }
  out.backward_ = () => {
    for (let i = 0; i < rows.length; i++) {
      for (let j = 0; j < cols; j++) rows[i].grad[j] += out.grad[i * cols + j];
    }
  };
  return out;
}
