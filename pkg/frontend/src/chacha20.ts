// ChaCha20 stream cipher (RFC 8439 block function, zero nonce, counter 0).
// Used only for convergent chunk encryption, where each key is unique to
// its plaintext; bit-compatible with the backend (golden-vector tested).

function rotl32(v: number, n: number): number {
  return ((v << n) | (v >>> (32 - n))) >>> 0;
}

function quarterRound(s: Uint32Array, a: number, b: number, c: number, d: number): void {
  s[a] = (s[a] + s[b]) >>> 0; s[d] = rotl32(s[d] ^ s[a], 16);
  s[c] = (s[c] + s[d]) >>> 0; s[b] = rotl32(s[b] ^ s[c], 12);
  s[a] = (s[a] + s[b]) >>> 0; s[d] = rotl32(s[d] ^ s[a], 8);
  s[c] = (s[c] + s[d]) >>> 0; s[b] = rotl32(s[b] ^ s[c], 7);
}

function chachaBlock(key: Uint32Array, counter: number, nonce: Uint32Array): Uint8Array {
  const state = new Uint32Array(16);
  state[0] = 0x61707865; state[1] = 0x3320646e; state[2] = 0x79622d32; state[3] = 0x6b206574;
  state.set(key, 4);
  state[12] = counter >>> 0;
  state.set(nonce, 13);
  const working = new Uint32Array(state);
  for (let round = 0; round < 10; round++) {
    quarterRound(working, 0, 4, 8, 12);
    quarterRound(working, 1, 5, 9, 13);
    quarterRound(working, 2, 6, 10, 14);
    quarterRound(working, 3, 7, 11, 15);
    quarterRound(working, 0, 5, 10, 15);
    quarterRound(working, 1, 6, 11, 12);
    quarterRound(working, 2, 7, 8, 13);
    quarterRound(working, 3, 4, 9, 14);
  }
  const out = new Uint8Array(64);
  const view = new DataView(out.buffer);
  for (let i = 0; i < 16; i++) {
    view.setUint32(i * 4, (working[i] + state[i]) >>> 0, true);
  }
  return out;
}

export function chacha20Xor(key: Uint8Array, data: Uint8Array): Uint8Array {
  if (key.length !== 32) throw new Error("chacha20 key must be 32 bytes");
  const keyWords = new Uint32Array(8);
  const keyView = new DataView(key.buffer, key.byteOffset, key.byteLength);
  for (let i = 0; i < 8; i++) keyWords[i] = keyView.getUint32(i * 4, true);
  const nonce = new Uint32Array(3); // all-zero nonce: keys are per-plaintext unique
  const out = new Uint8Array(data.length);
  for (let block = 0, counter = 0; block < data.length; block += 64, counter++) {
    const keystream = chachaBlock(keyWords, counter, nonce);
    const n = Math.min(64, data.length - block);
    for (let i = 0; i < n; i++) out[block + i] = data[block + i] ^ keystream[i];
  }
  return out;
}
