// Canonical binary encoding, mirroring the backend byte for byte: integers
// 8-byte big-endian, byte strings 4-byte-length-prefixed, lists
// count-prefixed.  These are the bytes that get hashed and signed; the JSON
// envelope is only transport.

export class ByteWriter {
  private parts: Uint8Array[] = [];

  u8(value: number): this {
    this.parts.push(new Uint8Array([value & 0xff]));
    return this;
  }

  u64(value: number | bigint): this {
    let v = BigInt(value);
    if (v < 0n || v > (1n << 64n) - 1n) throw new Error(`u64 out of range: ${value}`);
    const out = new Uint8Array(8);
    for (let i = 7; i >= 0; i--) {
      out[i] = Number(v & 0xffn);
      v >>= 8n;
    }
    this.parts.push(out);
    return this;
  }

  raw(data: Uint8Array): this {
    this.parts.push(data);
    return this;
  }

  bytes(data: Uint8Array): this {
    return this.count(data.length).raw(data);
  }

  str(text: string): this {
    return this.bytes(new TextEncoder().encode(text));
  }

  count(n: number): this {
    const out = new Uint8Array(4);
    new DataView(out.buffer).setUint32(0, n, false);
    this.parts.push(out);
    return this;
  }

  getValue(): Uint8Array {
    const total = this.parts.reduce((n, p) => n + p.length, 0);
    const out = new Uint8Array(total);
    let offset = 0;
    for (const part of this.parts) {
      out.set(part, offset);
      offset += part.length;
    }
    return out;
  }
}
