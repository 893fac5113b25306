"""Off-chain content-addressed file storage with convergent encryption.

Files are split into fixed-size chunks; each chunk is encrypted under a key
derived from its own content (key = keccak256(plaintext)), so identical
plaintext chunks always produce identical ciphertext and deduplicate even
though the store never sees plaintext.  The store addresses ciphertext by
its keccak256 digest, one file per chunk under a two-level hex fan-out.

The zero-nonce stream cipher is safe *only* because every key is unique to
its plaintext by construction; reusing a nonce under a reused key with
different messages would be fatal in any other design.  Known, accepted
leak: an adversary who can guess an exact plaintext chunk can confirm its
presence in the store.

The ledger stores only content_hash and manifest_hash.  The manifest's hash
commitment omits the convergent keys: keys belong to the client side, never
to the public chunk store.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms

from evault.encoding import ByteReader, ByteWriter, DecodeError, from_hex, to_hex
from evault.hashchain.keccak import Hash256, keccak256

DEFAULT_CHUNK_SIZE = 64 * 1024


class BadChunkSize(ValueError):
    pass


class EmptyObject(ValueError):
    pass


class StoreWriteFailure(OSError):
    pass


class MissingChunk(KeyError):
    def __init__(self, cipher_hash: Hash256) -> None:
        super().__init__(to_hex(cipher_hash))
        self.cipher_hash = cipher_hash


class IntegrityFailure(ValueError):
    pass


def chunk_bytes(data: bytes, chunk_size: int) -> list[bytes]:
    """Fixed-size split; concatenating the result reproduces ``data``."""
    if chunk_size < 1:
        raise BadChunkSize(f"chunk_size must be >= 1, got {chunk_size}")
    return [data[i : i + chunk_size] for i in range(0, len(data), chunk_size)]


def _stream_xor(key: bytes, data: bytes) -> bytes:
    # ChaCha20 with an all-zero nonce; see module docstring for why the zero
    # nonce is sound under per-plaintext-unique keys.
    cipher = Cipher(algorithms.ChaCha20(key, bytes(16)), mode=None)
    return cipher.encryptor().update(data)


def convergent_encrypt(chunk: bytes) -> tuple[bytes, bytes]:
    """(key, ciphertext) where key = keccak256(plaintext).  Deterministic:
    identical plaintext always yields the identical pair."""
    key = keccak256(chunk)
    return key, _stream_xor(key, chunk)


def convergent_decrypt(key: bytes, ciphertext: bytes) -> bytes:
    return _stream_xor(key, ciphertext)


@dataclass(frozen=True)
class ObjectManifest:
    """Off-chain descriptor for one stored object.

    entries pair each chunk's store address (cipher_hash) with its convergent
    key.  manifest_hash(), the on-ledger commitment, covers everything except
    the keys.
    """

    content_hash: Hash256  # keccak256 of the whole plaintext
    total_size: int
    chunk_size: int
    entries: tuple[tuple[Hash256, bytes], ...]  # (cipher_hash, convergent key)

    def encode(self, with_keys: bool = False) -> bytes:
        w = ByteWriter()
        w.raw(self.content_hash)
        w.u64(self.total_size)
        w.u64(self.chunk_size)
        w.count(len(self.entries))
        for cipher_hash, key in self.entries:
            w.raw(cipher_hash)
            if with_keys:
                w.raw(key)
        return w.getvalue()

    def manifest_hash(self) -> Hash256:
        return keccak256(self.encode(with_keys=False))

    def to_text(self) -> str:
        """Human-readable export: one line per entry (index, cipher hash, key)."""
        lines = [
            f"content_hash {to_hex(self.content_hash)}",
            f"total_size {self.total_size}",
            f"chunk_size {self.chunk_size}",
        ]
        for i, (cipher_hash, key) in enumerate(self.entries):
            lines.append(f"{i} {to_hex(cipher_hash)} {to_hex(key)}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "ObjectManifest":
        content_hash = b""
        total_size = chunk_size = 0
        entries: list[tuple[Hash256, bytes]] = []
        for line in text.splitlines():
            if not line.strip():
                continue
            fields = line.split()
            if fields[0] == "content_hash":
                content_hash = from_hex(fields[1])
            elif fields[0] == "total_size":
                total_size = int(fields[1])
            elif fields[0] == "chunk_size":
                chunk_size = int(fields[1])
            else:
                if int(fields[0]) != len(entries):
                    raise DecodeError(f"manifest entries out of order at {fields[0]}")
                entries.append((from_hex(fields[1]), from_hex(fields[2])))
        return ObjectManifest(content_hash, total_size, chunk_size, tuple(entries))

    @staticmethod
    def decode(data: bytes) -> "ObjectManifest":
        r = ByteReader(data)
        content_hash = r.raw(32)
        total_size = r.u64()
        chunk_size = r.u64()
        entries = tuple((r.raw(32), r.raw(32)) for _ in range(r.count()))
        r.expect_end()
        return ObjectManifest(content_hash, total_size, chunk_size, entries)


class ChunkStore:
    """Directory of ciphertext chunks addressed by cipher_hash.

    Writes are idempotent (an existing address is never rewritten) and
    atomic (temp file + rename), so concurrent puts of the same chunk are
    safe and readers never observe partial chunks.
    """

    def __init__(self, root: Path | str) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, cipher_hash: Hash256) -> Path:
        hexed = to_hex(cipher_hash)
        return self.root / hexed[:2] / hexed[2:4] / hexed

    def has(self, cipher_hash: Hash256) -> bool:
        return self._path(cipher_hash).exists()

    def put(self, ciphertext: bytes) -> tuple[Hash256, bool]:
        """Store ciphertext by its digest; returns (cipher_hash, newly_written)."""
        cipher_hash = keccak256(ciphertext)
        path = self._path(cipher_hash)
        if path.exists():
            return cipher_hash, False
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
            try:
                os.write(fd, ciphertext)
                os.fsync(fd)
            finally:
                os.close(fd)
            os.replace(tmp, path)
        except OSError as exc:
            raise StoreWriteFailure(f"cannot store chunk {to_hex(cipher_hash)}: {exc}") from exc
        return cipher_hash, True

    def get(self, cipher_hash: Hash256) -> bytes:
        path = self._path(cipher_hash)
        if not path.exists():
            raise MissingChunk(cipher_hash)
        return path.read_bytes()

    def unique_chunk_count(self) -> int:
        return sum(1 for _ in self.root.glob("??/??/*"))


def put_object(store: ChunkStore, data: bytes, chunk_size: int = DEFAULT_CHUNK_SIZE) -> ObjectManifest:
    """Chunk, encrypt and store ``data``; returns the manifest (with keys).

    Deduplicating: chunks whose ciphertext is already present are not
    rewritten, so re-putting an object adds zero new records.
    """
    if not data:
        raise EmptyObject("cannot store an empty object")
    entries = []
    for chunk in chunk_bytes(data, chunk_size):
        key, ciphertext = convergent_encrypt(chunk)
        cipher_hash, _ = store.put(ciphertext)
        entries.append((cipher_hash, key))
    return ObjectManifest(
        content_hash=keccak256(data),
        total_size=len(data),
        chunk_size=chunk_size,
        entries=tuple(entries),
    )


def get_object(store: ChunkStore, manifest: ObjectManifest) -> bytes:
    """Fetch, decrypt and reassemble; the result is verified against the
    manifest's content hash before it is returned."""
    parts = []
    for cipher_hash, key in manifest.entries:
        ciphertext = store.get(cipher_hash)
        if keccak256(ciphertext) != cipher_hash:
            raise IntegrityFailure(f"stored chunk {to_hex(cipher_hash)} is corrupt")
        parts.append(convergent_decrypt(key, ciphertext))
    data = b"".join(parts)
    if len(data) != manifest.total_size:
        raise IntegrityFailure(
            f"reassembled {len(data)} bytes, manifest says {manifest.total_size}"
        )
    if keccak256(data) != manifest.content_hash:
        raise IntegrityFailure("reassembled object does not match manifest content hash")
    return data
