"""The server-side ledger node: one authority, one writer, durable sealing.

All mutation funnels through submit(): a transaction is validated against
the speculative state (committed world plus the pending mempool), enqueued,
and sealed into the next block.  Sealing appends to the block log with
fsync before anything is acknowledged, so a receipt implies durability.
Readers take a reference to the latest committed WorldState, an immutable
value, and never block the writer.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from pathlib import Path

from evault.consensus import Authority, poa_resolver
from evault.contracts.state import (
    WorldState,
    apply_transaction,
    state_hash,
)
from evault.contracts.transactions import Transaction, tx_hash
from evault.hashchain.block import (
    GENESIS,
    Block,
    block_hash,
    build_block,
    verify_chain,
)
from evault.identity import IdentityDetails, Role, derive_uid, generate_keypair
from evault.vaultd.persistence import BlockLog, CorruptLog, SnapshotFile, read_log


class MempoolFull(RuntimeError):
    pass


def node_identity(node_name: str, seed: bytes) -> tuple[bytes, bytes, bytes]:
    """(proposer_uid, signing_key, verify_key) for a named vaultd node."""
    sk, vk = generate_keypair(seed)
    details = IdentityDetails(
        full_name=f"Vault Node {node_name}",
        national_id=f"vaultd-{node_name}",
        role=Role.REGISTRAR,
        contact="vaultd",
    )
    return derive_uid(details), sk, vk


@dataclass(frozen=True)
class Receipt:
    block_height: int
    tx_hash: bytes


class ServerNode:
    """Single-authority node with crash-safe persistence.

    seal_interval_ms == 0 seals synchronously inside submit(); a positive
    interval starts a background sealer and submit() blocks until its
    transaction is sealed (or the wait times out).
    """

    MEMPOOL_CAP = 10_000

    def __init__(
        self,
        data_dir: Path | str,
        node_name: str = "main",
        node_seed: bytes | None = None,
        seal_interval_ms: int = 0,
        batch_max: int = 100,
        snapshot_interval: int = 1_000,
        work_bits: int = 0,
        clock_ms=None,
    ) -> None:
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        seed_path = self.data_dir / "node.seed"
        if node_seed is None:
            if seed_path.exists():
                node_seed = seed_path.read_bytes()
            else:
                import secrets

                node_seed = secrets.token_bytes(32)
                seed_path.touch(mode=0o600)
                seed_path.write_bytes(node_seed)
        self.uid, self._signing_key, self.verify_key = node_identity(node_name, node_seed)
        self.authority = Authority(0, self.uid, self.verify_key)
        self._resolver = poa_resolver((self.authority,))
        self.work_bits = work_bits
        self.snapshot_interval = snapshot_interval
        self.batch_max = batch_max
        self.seal_interval_ms = seal_interval_ms
        self.clock_ms = clock_ms or (lambda: int(time.time() * 1000))

        self._log = BlockLog(self.data_dir / "blocks.log")
        self._snapshot = SnapshotFile(self.data_dir / "snapshot.bin")
        self._lock = threading.Lock()
        self._sealed = threading.Condition(self._lock)
        self._mempool: list[Transaction] = []
        self._mempool_hashes: set[bytes] = set()
        self._recent_receipts: dict[bytes, int] = {}
        self._stop = threading.Event()
        self._sealer: threading.Thread | None = None

        self.chain: list[Block] = [GENESIS]
        self.world: WorldState = WorldState.genesis()
        self._speculative: WorldState = self.world
        self._recover()

        if seal_interval_ms > 0:
            self._sealer = threading.Thread(target=self._seal_loop, daemon=True)
            self._sealer.start()

    # -- recovery ----------------------------------------------------------

    def _recover(self) -> None:
        log_path = self.data_dir / "blocks.log"
        frames, _end = read_log(log_path, 0)
        chain = [GENESIS] + frames
        bad = verify_chain(chain, self._resolver, self.work_bits)
        if bad is not None:
            raise CorruptLog(f"persisted chain invalid at height {bad}")

        # blocks before the snapshot are still loaded for serving, but the
        # state fold resumes from the checkpoint
        world = WorldState.genesis()
        fold_from = 1
        snap = self._snapshot.read()
        if snap is not None:
            height, _log_offset, tip, snap_world = snap
            if height >= len(chain) or block_hash(chain[height].header) != block_hash(tip.header):
                raise CorruptLog("snapshot does not match the block log prefix")
            world = snap_world
            fold_from = height + 1
        for block in chain[fold_from:]:
            for tx in block.transactions:
                world = apply_transaction(world, tx, block.header.height)
        self.chain = chain
        self.world = world
        self._speculative = world

    # -- write path ----------------------------------------------------------

    def submit(self, tx: Transaction, wait_ms: int = 10_000) -> Receipt:
        """Validate, enqueue, seal, persist; returns the durable receipt.

        Raises TxRejected (typed, state untouched) or MempoolFull."""
        with self._lock:
            if len(self._mempool) >= self.MEMPOOL_CAP:
                raise MempoolFull(f"mempool at capacity {self.MEMPOOL_CAP}")
            # validates against committed state plus everything pending; the
            # whole mempool seals into one block at the next height
            self._speculative = apply_transaction(
                self._speculative, tx, self.chain[-1].header.height + 1
            )
            self._mempool.append(tx)
            h = tx_hash(tx)
            self._mempool_hashes.add(h)
            if self.seal_interval_ms == 0 or len(self._mempool) >= self.batch_max:
                self._seal_locked()
                return Receipt(self._recent_receipts[h], h)
            deadline = time.monotonic() + wait_ms / 1000
            while h not in self._recent_receipts:
                remaining = deadline - time.monotonic()
                if remaining <= 0 or not self._sealed.wait(timeout=remaining):
                    raise TimeoutError("transaction not sealed before deadline")
            return Receipt(self._recent_receipts[h], h)

    def seal(self) -> int | None:
        """Force a seal of whatever is pending; returns the new height."""
        with self._lock:
            return self._seal_locked()

    def _seal_locked(self) -> int | None:
        if not self._mempool:
            return None
        parent = self.chain[-1].header
        timestamp = max(self.clock_ms(), parent.timestamp)
        block = build_block(
            parent=parent,
            txs=self._mempool,
            proposer=self.uid,
            timestamp=timestamp,
            signing_key=self._signing_key,
            work_bits=self.work_bits,
        )
        self._log.append(block)  # fsync before acknowledging
        self.chain.append(block)
        self.world = self._speculative
        height = block.header.height
        for sealed_tx in self._mempool:
            self._recent_receipts[tx_hash(sealed_tx)] = height
        while len(self._recent_receipts) > 10 * self.MEMPOOL_CAP:
            self._recent_receipts.pop(next(iter(self._recent_receipts)))
        self._mempool = []
        self._mempool_hashes = set()
        if self.snapshot_interval > 0 and height % self.snapshot_interval == 0:
            self._snapshot.write(height, self._log.tail_offset(), block, self.world)
        self._sealed.notify_all()
        return height

    def _seal_loop(self) -> None:
        while not self._stop.wait(self.seal_interval_ms / 1000):
            self.seal()

    def close(self) -> None:
        self._stop.set()
        if self._sealer is not None:
            self._sealer.join(timeout=2)
        self.seal()
        self._log.close()

    # -- read path ----------------------------------------------------------

    def snapshot_world(self) -> WorldState:
        """Latest committed state; immutable, safe to read without the lock."""
        return self.world

    def head(self) -> tuple[int, bytes]:
        tip = self.chain[-1]
        return tip.header.height, block_hash(tip.header)

    def block_at(self, height: int) -> Block | None:
        if 0 <= height < len(self.chain):
            return self.chain[height]
        return None

    def state_hash(self) -> bytes:
        return state_hash(self.world)
