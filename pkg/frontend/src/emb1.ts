/**
 * EMB1 binary interchange format, matching the retrieval engine byte for byte:
 * "EMB1", u32-LE version=1, u32-LE dim, u64-LE count, then per record
 * u16-LE id byte length, id UTF-8 bytes, dim x f32-LE.
 */

export interface Embeddings {
  dim: number;
  ids: string[];
  vectors: Float32Array[];
}

export function encodeEmb1(emb: Embeddings): Buffer {
  const chunks: Buffer[] = [];
  const header = Buffer.alloc(20);
  header.write("EMB1", 0, "ascii");
  header.writeUInt32LE(1, 4);
  header.writeUInt32LE(emb.dim, 8);
  header.writeBigUInt64LE(BigInt(emb.ids.length), 12);
  chunks.push(header);
  emb.ids.forEach((id, i) => {
    const vec = emb.vectors[i];
    if (vec.length !== emb.dim) throw new Error(`vector ${id} has dim ${vec.length}, expected ${emb.dim}`);
    for (const value of vec) {
      if (!Number.isFinite(value)) throw new Error(`non-finite value in vector for id ${id}`);
    }
    const idBytes = Buffer.from(id, "utf-8");
    const lead = Buffer.alloc(2);
    lead.writeUInt16LE(idBytes.length, 0);
    const vecBuf = Buffer.alloc(4 * emb.dim);
    for (let j = 0; j < emb.dim; j++) vecBuf.writeFloatLE(vec[j], 4 * j);
    chunks.push(lead, idBytes, vecBuf);
  });
  return Buffer.concat(chunks);
}

export function decodeEmb1(data: Buffer): Embeddings {
  if (data.subarray(0, 4).toString("ascii") !== "EMB1") throw new Error("bad magic: not an EMB1 file");
  const version = data.readUInt32LE(4);
  if (version !== 1) throw new Error(`unsupported EMB1 version ${version}`);
  const dim = data.readUInt32LE(8);
  const count = Number(data.readBigUInt64LE(12));
  const ids: string[] = [];
  const vectors: Float32Array[] = [];
  let offset = 20;
  for (let i = 0; i < count; i++) {
    if (offset + 2 > data.length) throw new Error(`truncated at record ${i}`);
    const idLen = data.readUInt16LE(offset);
    offset += 2;
    if (offset + idLen + 4 * dim > data.length) throw new Error(`truncated at record ${i}`);
    ids.push(data.subarray(offset, offset + idLen).toString("utf-8"));
    offset += idLen;
    const vec = new Float32Array(dim);
    for (let j = 0; j < dim; j++) vec[j] = data.readFloatLE(offset + 4 * j);
    offset += 4 * dim;
    vectors.push(vec);
  }
  if (offset !== data.length) throw new Error("trailing bytes after last record");
  return { dim, ids, vectors };
}
