"""Proof-of-authority replication and a deterministic network simulator.

Consensus is a fixed, ordered set of registrar-operated authorities taking
turns: the proposer due at height h is authorities[(h-1) mod n].  Fork
choice is longest-chain, ties broken by the lexicographically smaller tip
hash, so any two nodes comparing the same pair pick the same winner.

The simulator is single-threaded over virtual ticks with one seeded RNG:
equal (config, schedule, ticks) inputs replay bit-identically, including
the event log.  Messages are delayed and dropped by the seeded generator;
nodes rebroadcast tip and mempool every RETRANSMIT_INTERVAL ticks, which is
all the anti-entropy needed for convergence once injection stops.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from evault.contracts.state import WorldState, apply_transaction, state_hash
from evault.contracts.transactions import Transaction, tx_hash
from evault.hashchain.block import (
    GENESIS,
    Block,
    ChainError,
    block_hash,
    build_block,
    verify_chain,
)
from evault.hashchain.keccak import Hash256, keccak256
from evault.identity import UID, IdentityDetails, Role, derive_uid, generate_keypair

RETRANSMIT_INTERVAL = 10


class EmptyAuthoritySet(ValueError):
    pass


class InvalidChain(ValueError):
    pass


class BadSchedule(ValueError):
    pass


class ZeroTicks(ValueError):
    pass


@dataclass(frozen=True)
class Authority:
    node_id: int
    proposer_uid: UID
    verify_key: bytes


AuthoritySet = tuple[Authority, ...]


def make_authorities(node_count: int) -> tuple[AuthoritySet, dict[int, bytes]]:
    """Deterministic authority set for a simulated network: node i's signing
    seed and registrar-role UID are derived from its index, so every run of
    a given node_count agrees on the schedule and keys."""
    authorities = []
    signing_keys = {}
    for i in range(node_count):
        seed = keccak256(b"evault/authority-seed/" + i.to_bytes(8, "big"))
        sk, vk = generate_keypair(seed)
        details = IdentityDetails(
            full_name=f"Authority Node {i}",
            national_id=f"authority-{i}",
            role=Role.REGISTRAR,
            contact="consensus",
        )
        authorities.append(Authority(i, derive_uid(details), vk))
        signing_keys[i] = sk
    return tuple(authorities), signing_keys


def expected_proposer(height: int, authorities: AuthoritySet) -> int:
    """node_id due to propose the block at ``height`` (round robin)."""
    if not authorities:
        raise EmptyAuthoritySet("authority set must be non-empty")
    if height < 1:
        raise ValueError(f"height must be >= 1, got {height}")
    return authorities[(height - 1) % len(authorities)].node_id


def poa_resolver(authorities: AuthoritySet):
    """verify_chain proposer resolver for the round-robin schedule."""
    if not authorities:
        raise EmptyAuthoritySet("authority set must be non-empty")
    by_id = {a.node_id: a for a in authorities}

    def proposer_for(height: int) -> tuple[UID, bytes]:
        authority = by_id[expected_proposer(height, authorities)]
        return authority.proposer_uid, authority.verify_key

    return proposer_for


def choose_fork(
    current: list[Block],
    candidate: list[Block],
    authorities: AuthoritySet,
    work_bits: int = 0,
) -> list[Block]:
    """Deterministic fork choice: longer chain wins, equal lengths go to the
    lexicographically smaller tip hash.  Raises InvalidChain if the candidate
    fails verify_chain under the authority schedule."""
    try:
        bad = verify_chain(candidate, poa_resolver(authorities), work_bits)
    except ChainError as exc:
        raise InvalidChain(str(exc)) from exc
    if bad is not None:
        raise InvalidChain(f"candidate chain invalid at height {bad}")
    if len(candidate) > len(current):
        return candidate
    if len(candidate) < len(current):
        return current
    if block_hash(candidate[-1].header) < block_hash(current[-1].header):
        return candidate
    return current


@dataclass(frozen=True)
class NetworkConfig:
    node_count: int
    mean_delay_ticks: int = 1
    drop_probability: float = 0.0
    rng_seed: int = 0
    work_bits: int = 0


@dataclass
class NodeState:
    node_id: int
    chain: list[Block]
    world: WorldState
    mempool: dict[Hash256, Transaction] = field(default_factory=dict)
    # tip hashes of chains this node has already fully verified
    _verified_tips: set[Hash256] = field(default_factory=set)

    def tip(self) -> Block:
        return self.chain[-1]

    def tip_hash(self) -> Hash256:
        return block_hash(self.chain[-1].header)

    def height(self) -> int:
        return self.chain[-1].header.height


@dataclass(frozen=True)
class SimEvent:
    tick: int
    node_id: int
    kind: str  # inject | propose | adopt | reject | drop
    detail: str

    def to_line(self) -> str:
        return f"tick={self.tick} node={self.node_id} kind={self.kind} {self.detail}"


@dataclass
class SimulationResult:
    config: NetworkConfig
    authorities: AuthoritySet
    nodes: list[NodeState]
    events: list[SimEvent]

    def tip_hashes(self) -> list[Hash256]:
        return [n.tip_hash() for n in self.nodes]

    def state_hashes(self) -> list[Hash256]:
        return [state_hash(n.world) for n in self.nodes]

    def converged(self) -> bool:
        return len(set(self.tip_hashes())) == 1

    def event_log(self) -> str:
        return "\n".join(e.to_line() for e in self.events) + "\n"


@dataclass(frozen=True)
class _Message:
    deliver_at: int
    seq: int
    sender: int
    receiver: int
    chain: Optional[tuple[Block, ...]]
    txs: tuple[Transaction, ...]


def _fold_chain(chain: list[Block]) -> WorldState:
    world = WorldState.genesis()
    for block in chain[1:]:
        for tx in block.transactions:
            world = apply_transaction(world, tx, block.header.height)
    return world


def _chain_tx_hashes(chain: list[Block]) -> set[Hash256]:
    return {tx_hash(tx) for block in chain[1:] for tx in block.transactions}


def _seal_from_mempool(node: NodeState) -> tuple[list[Transaction], WorldState]:
    """Pick the applicable mempool transactions in deterministic order,
    folding each into a trial state; respects per-sender nonce chains by
    sweeping until no further transaction applies."""
    world = node.world
    chosen: list[Transaction] = []
    pending = dict(node.mempool)
    progressed = True
    while progressed and pending:
        progressed = False
        for h in sorted(pending):
            tx = pending[h]
            try:
                world = apply_transaction(world, tx, node.height() + 1)
            except Exception:
                continue
            chosen.append(tx)
            del pending[h]
            progressed = True
    return chosen, world


def _prune_mempool(node: NodeState) -> None:
    """Drop transactions that can never apply again (nonce already consumed)
    or that are already sealed in the node's chain."""
    sealed = _chain_tx_hashes(node.chain)
    for h in list(node.mempool):
        tx = node.mempool[h]
        if h in sealed or tx.nonce <= node.world.nonces.get(tx.sender_uid, 0):
            del node.mempool[h]


def simulate(
    config: NetworkConfig,
    tx_schedule: list[tuple[int, int, Transaction]],
    ticks: int,
) -> SimulationResult:
    """Run the discrete-tick network; pure function of its arguments.

    Each tick: due messages are delivered, scheduled transactions injected,
    every node that is the round-robin proposer for its local next height
    seals its applicable mempool into a block and broadcasts, and on
    retransmission ticks every node re-sends tip and mempool (anti-entropy).
    """
    if ticks < 1:
        raise ZeroTicks(f"ticks must be >= 1, got {ticks}")
    for tick, node_id, _ in tx_schedule:
        if not 0 <= node_id < config.node_count:
            raise BadSchedule(f"schedule names unknown node {node_id}")
        if tick < 1:
            raise BadSchedule(f"schedule tick must be >= 1, got {tick}")

    authorities, signing_keys = make_authorities(config.node_count)
    rng = random.Random(config.rng_seed)
    nodes = [
        NodeState(i, [GENESIS], WorldState.genesis()) for i in range(config.node_count)
    ]
    events: list[SimEvent] = []
    inbox: list[_Message] = []
    seq = 0

    def send_all(tick: int, sender: int, chain, txs) -> None:
        nonlocal seq
        for receiver in range(config.node_count):
            if receiver == sender:
                continue
            if rng.random() < config.drop_probability:
                events.append(SimEvent(tick, receiver, "drop", f"from={sender}"))
                continue
            if config.mean_delay_ticks <= 1:
                delay = 1
            else:
                delay = rng.randint(1, 2 * config.mean_delay_ticks - 1)
            seq += 1
            inbox.append(_Message(tick + delay, seq, sender, receiver, chain, txs))

    def receive(tick: int, node: NodeState, msg: _Message) -> None:
        sealed = _chain_tx_hashes(node.chain)
        for tx in msg.txs:
            h = tx_hash(tx)
            if h not in node.mempool and h not in sealed:
                node.mempool[h] = tx
        if msg.chain is None:
            return
        candidate = list(msg.chain)
        cand_tip = block_hash(candidate[-1].header)
        # cheap pre-filter: a losing candidate need not be verified; after
        # these guards the candidate wins fork choice iff it is valid
        if cand_tip == node.tip_hash():
            return
        if len(candidate) < len(node.chain):
            return
        if len(candidate) == len(node.chain) and cand_tip >= node.tip_hash():
            return
        if cand_tip not in node._verified_tips:
            try:
                choose_fork(node.chain, candidate, authorities, config.work_bits)
            except InvalidChain as exc:
                events.append(SimEvent(tick, node.node_id, "reject", f"reason={exc}"))
                return
            node._verified_tips.add(cand_tip)
        # return transactions sealed only in the abandoned fork to the mempool
        abandoned = {tx_hash(tx): tx for b in node.chain[1:] for tx in b.transactions}
        node.chain = candidate
        node.world = _fold_chain(candidate)
        for h, tx in abandoned.items():
            node.mempool.setdefault(h, tx)
        _prune_mempool(node)
        events.append(
            SimEvent(tick, node.node_id, "adopt", f"height={node.height()} tip={cand_tip.hex()[:16]}")
        )

    for tick in range(1, ticks + 1):
        # 1. deliver due messages in deterministic order
        due = sorted(
            (m for m in inbox if m.deliver_at <= tick), key=lambda m: (m.deliver_at, m.seq)
        )
        inbox = [m for m in inbox if m.deliver_at > tick]
        for msg in due:
            receive(tick, nodes[msg.receiver], msg)

        # 2. inject scheduled transactions
        for sched_tick, node_id, tx in tx_schedule:
            if sched_tick == tick:
                node = nodes[node_id]
                h = tx_hash(tx)
                if h not in node.mempool:
                    node.mempool[h] = tx
                events.append(SimEvent(tick, node_id, "inject", f"tx={h.hex()[:16]}"))

        # 3. the due proposer (per local tip height) seals a block
        for node in nodes:
            if expected_proposer(node.height() + 1, authorities) != node.node_id:
                continue
            if not node.mempool:
                continue
            chosen, new_world = _seal_from_mempool(node)
            if not chosen:
                continue
            block = build_block(
                parent=node.tip().header,
                txs=chosen,
                proposer=authorities[node.node_id].proposer_uid,
                timestamp=tick,
                signing_key=signing_keys[node.node_id],
                work_bits=config.work_bits,
            )
            node.chain = node.chain + [block]
            node.world = new_world
            node._verified_tips.add(node.tip_hash())
            for tx in chosen:
                node.mempool.pop(tx_hash(tx), None)
            _prune_mempool(node)
            events.append(
                SimEvent(
                    tick,
                    node.node_id,
                    "propose",
                    f"height={node.height()} txs={len(chosen)} tip={node.tip_hash().hex()[:16]}",
                )
            )
            send_all(tick, node.node_id, tuple(node.chain), tuple(node.mempool.values()))

        # 4. periodic anti-entropy
        if tick % RETRANSMIT_INTERVAL == 0:
            for node in nodes:
                txs = tuple(node.mempool[h] for h in sorted(node.mempool))
                send_all(tick, node.node_id, tuple(node.chain), txs)

    return SimulationResult(config, authorities, nodes, events)
