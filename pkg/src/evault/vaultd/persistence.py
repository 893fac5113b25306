"""Durable chain storage: an append-only block log plus a periodic world
state snapshot.

Log layout: a sequence of frames, each a 4-byte big-endian length followed
by the block's canonical encoding.  A frame is fsynced before the block is
acknowledged.  On recovery a torn final frame (partial write at the tail)
is truncated with a warning; anything else that fails to parse is corruption
and refuses to load.

Snapshot layout: height, byte offset into the log of the first frame after
the snapshot, the tip block at that height, and the canonical world state.
Replaying the log from genesis equals the snapshot state at snapshot_height
plus the remaining frames; recovery uses the snapshot as its fold base.
"""

from __future__ import annotations

import logging
import os
import struct
import tempfile
from pathlib import Path

from evault.contracts.state import WorldState, decode_world_state, encode_world_state
from evault.encoding import ByteReader, ByteWriter, DecodeError
from evault.hashchain.block import Block, decode_block

logger = logging.getLogger(__name__)

_LEN = struct.Struct(">I")


class CorruptLog(RuntimeError):
    """Non-torn log corruption; the node refuses to start on this data."""


class BlockLog:
    """Append-only frame log with fsync-before-acknowledge semantics."""

    def __init__(self, path: Path | str) -> None:
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "ab")

    def append(self, block: Block) -> None:
        raw = block.encode()
        self._fh.write(_LEN.pack(len(raw)))
        self._fh.write(raw)
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def close(self) -> None:
        self._fh.close()

    def tail_offset(self) -> int:
        return self._fh.tell()


def read_log(path: Path | str, start_offset: int = 0) -> tuple[list[Block], int]:
    """Read every complete frame from ``start_offset`` on.

    Returns (blocks, end_offset).  A torn final frame is truncated off the
    file and logged; a frame that parses to garbage raises CorruptLog.
    """
    path = Path(path)
    blocks: list[Block] = []
    with open(path, "rb") as fh:
        fh.seek(start_offset)
        offset = start_offset
        while True:
            header = fh.read(4)
            if not header:
                break
            if len(header) < 4:
                _truncate_tail(path, offset)
                return blocks, offset
            (length,) = _LEN.unpack(header)
            payload = fh.read(length)
            if len(payload) < length:
                _truncate_tail(path, offset)
                return blocks, offset
            try:
                blocks.append(decode_block(payload))
            except DecodeError as exc:
                raise CorruptLog(
                    f"frame at offset {offset} does not decode: {exc}"
                ) from exc
            offset += 4 + length
    return blocks, offset


def _truncate_tail(path: Path, offset: int) -> None:
    logger.warning(
        "torn final record in %s: truncating to %d bytes", path, offset
    )
    with open(path, "r+b") as fh:
        fh.truncate(offset)


class SnapshotFile:
    """Latest-wins world state checkpoint, written atomically."""

    def __init__(self, path: Path | str) -> None:
        self.path = Path(path)

    def write(self, height: int, log_offset: int, tip: Block, world: WorldState) -> None:
        w = ByteWriter()
        w.u64(height)
        w.u64(log_offset)
        w.bytes(tip.encode())
        w.bytes(encode_world_state(world))
        self.path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.path.parent, prefix=".snap-")
        try:
            os.write(fd, w.getvalue())
            os.fsync(fd)
        finally:
            os.close(fd)
        os.replace(tmp, self.path)

    def read(self) -> tuple[int, int, Block, WorldState] | None:
        """None when no snapshot exists; CorruptLog when one exists but does
        not parse."""
        if not self.path.exists():
            return None
        try:
            r = ByteReader(self.path.read_bytes())
            height = r.u64()
            log_offset = r.u64()
            tip = decode_block(r.bytes())
            world = decode_world_state(r.bytes())
            r.expect_end()
        except DecodeError as exc:
            raise CorruptLog(f"snapshot {self.path} does not parse: {exc}") from exc
        return height, log_offset, tip, world
