// Ed25519 signing via WebCrypto (supported by modern browsers and node 20).
// Keys are imported from the raw 32-byte seed wrapped in a PKCS8 envelope;
// the seed lives only in memory for the session, never in storage.

import { fromHex } from "./keccak.js";

const PKCS8_PREFIX = fromHex("302e020100300506032b657004220420");

function subtle(): SubtleCrypto {
  const c = globalThis.crypto;
  if (!c || !c.subtle) throw new Error("WebCrypto is not available");
  return c.subtle;
}

export class Signer {
  private constructor(
    private readonly key: CryptoKey,
    readonly verifyKey: Uint8Array,
  ) {}

  static async fromSeed(seed: Uint8Array): Promise<Signer> {
    if (seed.length !== 32) throw new Error("seed must be 32 bytes");
    const pkcs8 = new Uint8Array(PKCS8_PREFIX.length + 32);
    pkcs8.set(PKCS8_PREFIX);
    pkcs8.set(seed, PKCS8_PREFIX.length);
    const key = await subtle().importKey("pkcs8", pkcs8, { name: "Ed25519" }, true, ["sign"]);
    // derive the raw public key by exporting the key pair's public half
    const jwk = await subtle().exportKey("jwk", key);
    const verifyKey = base64UrlToBytes(jwk.x as string);
    return new Signer(key, verifyKey);
  }

  async sign(message: Uint8Array): Promise<Uint8Array> {
    const sig = await subtle().sign({ name: "Ed25519" }, this.key, message as BufferSource);
    return new Uint8Array(sig);
  }
}

export async function verify(
  verifyKey: Uint8Array,
  message: Uint8Array,
  signature: Uint8Array,
): Promise<boolean> {
  try {
    const key = await subtle().importKey(
      "raw", verifyKey as BufferSource, { name: "Ed25519" }, false, ["verify"],
    );
    return await subtle().verify({ name: "Ed25519" }, key, signature as BufferSource, message as BufferSource);
  } catch {
    return false;
  }
}

function base64UrlToBytes(text: string): Uint8Array {
  const b64 = text.replace(/-/g, "+").replace(/_/g, "/");
  const padded = b64 + "=".repeat((4 - (b64.length % 4)) % 4);
  const raw = atob(padded);
  const out = new Uint8Array(raw.length);
  for (let i = 0; i < raw.length; i++) out[i] = raw.charCodeAt(i);
  return out;
}
