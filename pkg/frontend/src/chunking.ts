// In-browser chunking and convergent encryption for the upload flow: the
// whole-file hash and every chunk key are computed locally, chunks leave
// the page as ciphertext only.

import { chacha20Xor } from "./chacha20.js";
import { ManifestEntry } from "./codec.js";
import { keccak256 } from "./keccak.js";

export const DEFAULT_CHUNK_SIZE = 64 * 1024;

export interface EncryptedChunk {
  cipherHash: Uint8Array;
  key: Uint8Array;
  ciphertext: Uint8Array;
}

export function chunkBytes(data: Uint8Array, chunkSize: number): Uint8Array[] {
  if (chunkSize < 1) throw new Error("chunk size must be >= 1");
  const chunks: Uint8Array[] = [];
  for (let offset = 0; offset < data.length; offset += chunkSize) {
    chunks.push(data.subarray(offset, offset + chunkSize));
  }
  return chunks;
}

export function encryptChunk(plaintext: Uint8Array): EncryptedChunk {
  const key = keccak256(plaintext);
  const ciphertext = chacha20Xor(key, plaintext);
  return { cipherHash: keccak256(ciphertext), key, ciphertext };
}

export function encryptFile(data: Uint8Array, chunkSize = DEFAULT_CHUNK_SIZE): {
  contentHash: Uint8Array;
  chunks: EncryptedChunk[];
  entries: ManifestEntry[];
} {
  const chunks = chunkBytes(data, chunkSize).map(encryptChunk);
  return {
    contentHash: keccak256(data),
    chunks,
    entries: chunks.map((c) => ({ cipherHash: c.cipherHash, key: c.key })),
  };
}
