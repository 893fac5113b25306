"""Acceptance suite: one test per acceptance criterion, each printing a
pass/fail line with its runtime against the pinned budget.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines.  This suite exercises only the Python service and libraries; it is
fully runnable without the browser frontend.
"""

import random
import time
from dataclasses import replace

import pytest

from evault import consensus
from evault.contracts import (
    TransferCustody,
    TxRejected,
    UploadDocument,
    VerifyOutcome,
    WorldState,
    apply_transaction,
    check_permission,
    encode_world_state,
    make_transaction,
    pending_cases_for_judge,
    state_hash,
    verify_document,
)
from evault.contracts.permissions import Action, PermissionError_
from evault.contracts.transactions import CaseStatus
from evault.filestore import ChunkStore, IntegrityFailure, get_object, put_object
from evault.hashchain import keccak256, verify_chain
from evault.hashchain.block import Block
from evault.identity import Role
from evault.vaultd.node import ServerNode
from evault.workload import demo_schedule

from helpers import Scenario, make_actor
from test_blocks import build_chain, resolver


def report(name: str, limit_s: float, start: float) -> None:
    elapsed = time.perf_counter() - start
    print(f"\nPASS {name}: {elapsed:.2f}s (budget {limit_s:g}s)")
    assert elapsed < limit_s, f"{name} exceeded its {limit_s}s budget ({elapsed:.2f}s)"


@pytest.fixture(scope="module", autouse=True)
def warm_hash_jit():
    keccak256(b"warmup")  # JIT compile outside any timed window


def test_hash_vectors():
    """keccak256("") and keccak256("abc") match the published Keccak-256
    reference vectors exactly."""
    start = time.perf_counter()
    assert keccak256(b"").hex() == (
        "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470"
    )
    assert keccak256(b"abc").hex() == (
        "4e03657aea45a94fc7d47ba826c8d667c0d1e6e33a64a036ec44f58fa12d6c45"
    )
    report("hash vectors", 1, start)


def _world_with_documents(doc_count: int):
    sc = Scenario()
    registrar = make_actor("Acceptance Registrar", Role.REGISTRAR)
    judge = make_actor("Acceptance Judge", Role.JUDGE)
    lawyer = make_actor("Acceptance Lawyer", Role.LAWYER)
    pet = make_actor("Acceptance Pet", Role.CITIZEN)
    dfd = make_actor("Acceptance Dfd", Role.CITIZEN)
    sc.bootstrap_registrar(registrar)
    for a in (judge, lawyer, pet, dfd):
        sc.register(registrar, a)
    case_id = sc.file_case(registrar, "acceptance case", pet, dfd, [lawyer])
    rng = random.Random(1001)
    originals = {}
    for i in range(doc_count):
        content = rng.randbytes(rng.randint(64, 2048))
        doc_id = sc.upload(lawyer, case_id, f"doc-{i}", content)
        originals[doc_id] = content
    return sc.world, originals


def test_tamper_detection():
    """1,000 randomized trials: a single bit flip is always Tampered, the
    pristine bytes are always Match."""
    world, originals = _world_with_documents(40)
    doc_ids = list(originals)
    rng = random.Random(2002)
    start = time.perf_counter()
    for _ in range(1000):
        doc_id = rng.choice(doc_ids)
        content = originals[doc_id]
        assert verify_document(world, doc_id, content) is VerifyOutcome.MATCH
        flipped = bytearray(content)
        pos = rng.randrange(len(flipped))
        flipped[pos] ^= 1 << rng.randrange(8)
        assert verify_document(world, doc_id, bytes(flipped)) is VerifyOutcome.TAMPERED
    report("tamper detection (1000 trials)", 10, start)


def _mutate_block(block: Block, rng: random.Random) -> Block:
    """A decodable single-byte mutation somewhere inside the block."""
    choice = rng.randrange(5)
    if choice == 0:  # transaction payload byte
        txs = list(block.transactions)
        k = rng.randrange(len(txs))
        tx = txs[k]
        txs[k] = replace(tx, submitted_at=tx.submitted_at ^ (1 << rng.randrange(32)))
        return Block(block.header, tuple(txs), block.signature)
    if choice == 1:  # transaction signature byte
        txs = list(block.transactions)
        k = rng.randrange(len(txs))
        sig = bytearray(txs[k].signature)
        sig[rng.randrange(len(sig))] ^= 1 << rng.randrange(8)
        txs[k] = replace(txs[k], signature=bytes(sig))
        return Block(block.header, tuple(txs), block.signature)
    if choice == 2:  # header parent hash byte
        parent = bytearray(block.header.parent_hash)
        parent[rng.randrange(32)] ^= 1 << rng.randrange(8)
        return Block(replace(block.header, parent_hash=bytes(parent)), block.transactions, block.signature)
    if choice == 3:  # header timestamp bit
        header = replace(block.header, timestamp=block.header.timestamp ^ (1 << rng.randrange(20)))
        return Block(header, block.transactions, block.signature)
    # block signature byte
    sig = bytearray(block.signature)
    sig[rng.randrange(len(sig))] ^= 1 << rng.randrange(8)
    return Block(block.header, block.transactions, bytes(sig))


def test_chain_tamper_localization():
    """200 trials on 20-block chains: a mutation at uniformly random block i
    is localized to first invalid height = i."""
    base_chain = build_chain(20)
    assert verify_chain(base_chain, resolver) is None
    rng = random.Random(3003)
    start = time.perf_counter()
    for _ in range(200):
        i = rng.randint(1, 20)
        trial = list(base_chain)
        trial[i] = _mutate_block(trial[i], rng)
        assert verify_chain(trial, resolver) == i
    report("chain tamper localization (200 trials)", 10, start)


def test_permission_matrix():
    """Exhaustive (role, action, resource-relationship) enumeration on a
    4-identity, 2-case fixture matches the documented policy matrix."""
    sc = Scenario()
    registrar = make_actor("Matrix Registrar", Role.REGISTRAR)
    judge = make_actor("Matrix Judge", Role.JUDGE)
    lawyer = make_actor("Matrix Lawyer", Role.LAWYER)
    citizen = make_actor("Matrix Citizen", Role.CITIZEN)
    sc.bootstrap_registrar(registrar)
    for a in (judge, lawyer, citizen):
        sc.register(registrar, a)
    # case 1: lawyer is counsel, citizen is petitioner; case 2: neither
    case1 = sc.file_case(registrar, "counsel case", citizen, registrar, [lawyer])
    case2 = sc.file_case(registrar, "other case", registrar, judge, [])
    doc1 = sc.upload(lawyer, case1, "exhibit-1", b"case1 evidence")
    sc.grant(judge, doc1, citizen)  # citizen now in doc1's acl
    # a document on case 2 uploaded by... no counsel exists; grant the lawyer
    # nothing: case2 carries no document, so doc-on-other-case is modeled by
    # doc1 vs actors unrelated to case1
    world = sc.world
    actors = {"registrar": registrar, "judge": judge, "lawyer": lawyer, "citizen": citizen}

    # expected verdicts: (actor, action, resource) -> bool
    cases = {"case1": case1, "case2": case2}
    docs = {"doc1": doc1}
    expected = {}
    for name in actors:
        for action in Action:
            if action in (Action.REGISTER_IDENTITY, Action.FILE_CASE):
                expected[(name, action, None)] = name == "registrar"
            elif action in (Action.SCHEDULE_HEARING, Action.UPDATE_CASE_STATUS):
                for cname in cases:
                    expected[(name, action, cname)] = name == "judge"  # judge owns both
            elif action is Action.UPLOAD_DOCUMENT:
                expected[(name, action, "case1")] = name == "lawyer"
                expected[(name, action, "case2")] = False  # nobody is counsel on case2
            elif action is Action.GRANT_ACCESS:
                expected[(name, action, "doc1")] = name in ("judge", "lawyer")
            elif action is Action.REVOKE_ACCESS:
                expected[(name, action, "doc1")] = name == "judge"
            elif action is Action.TRANSFER_CUSTODY:
                expected[(name, action, "doc1")] = name == "lawyer"
            elif action is Action.SIGN_DOCUMENT:
                # counsel lawyer, or citizen party of the document's case
                expected[(name, action, "doc1")] = name in ("lawyer", "citizen")
            elif action is Action.READ_DOCUMENT:
                # ACL membership: uploader+judge+counsel floor, plus granted citizen
                expected[(name, action, "doc1")] = name in ("judge", "lawyer", "citizen")

    start = time.perf_counter()
    deviations = []
    for (name, action, resource_name), want in expected.items():
        resource = None
        if resource_name in cases:
            resource = cases[resource_name]
        elif resource_name in docs:
            resource = docs[resource_name]
        got = check_permission(world, actors[name].uid, action, resource)
        if got != want:
            deviations.append((name, action.value, resource_name, want, got))
    assert deviations == [], f"matrix deviations: {deviations}"
    # unknown actor and unknown resource raise typed lookups
    with pytest.raises(PermissionError_):
        check_permission(world, bytes(32), Action.FILE_CASE, None)
    with pytest.raises(PermissionError_):
        check_permission(world, judge.uid, Action.SCHEDULE_HEARING, bytes(32))
    report(f"permission matrix ({len(expected)} combinations)", 5, start)


def _build_500_tx_fixture():
    """~500 applied transactions plus a set of invalid ones to inject."""
    sc = Scenario()
    registrar = make_actor("Replay Registrar", Role.REGISTRAR)
    judges = [make_actor(f"Replay Judge {i}", Role.JUDGE) for i in range(3)]
    lawyers = [make_actor(f"Replay Lawyer {i}", Role.LAWYER) for i in range(6)]
    citizens = [make_actor(f"Replay Citizen {i}", Role.CITIZEN) for i in range(30)]
    sc.bootstrap_registrar(registrar)
    for a in judges + lawyers + citizens:
        sc.register(registrar, a)
    rng = random.Random(4004)
    case_ids = []
    docs = []
    while len(sc.applied) < 500:
        roll = rng.random()
        if roll < 0.25 or not case_ids:
            pet, dfd = rng.sample(citizens, 2)
            counsel = rng.sample(lawyers, rng.randint(1, 2))
            case_ids.append(sc.file_case(registrar, f"matter {len(case_ids)}", pet, dfd, counsel))
        elif roll < 0.45:
            case_id = rng.choice(case_ids)
            judge = next(j for j in judges if j.uid == sc.world.cases[case_id].judge_uid)
            sc.schedule(judge, case_id, rng.randint(1, 10**12))
        elif roll < 0.7:
            case_id = rng.choice(case_ids)
            case = sc.world.cases[case_id]
            counsel_uid = rng.choice(sorted(case.lawyer_uids))
            counsel = next(l for l in lawyers if l.uid == counsel_uid)
            content = rng.randbytes(rng.randint(16, 256))
            docs.append((sc.upload(counsel, case_id, f"d{len(docs)}", content), counsel))
        elif roll < 0.85 and docs:
            doc_id, uploader = rng.choice(docs)
            doc = sc.world.documents[doc_id]
            if doc.current_custodian() == uploader.uid:
                target = rng.choice(judges + citizens)
                sc.transfer(uploader, doc_id, target)
        else:
            case_id = rng.choice(case_ids)
            case = sc.world.cases[case_id]
            if case.status is CaseStatus.FILED:
                judge = next(j for j in judges if j.uid == case.judge_uid)
                sc.update_status(judge, case_id, CaseStatus.IN_HEARING)
    return sc, registrar, lawyers, citizens, docs


def test_replay_determinism():
    """Folding the fixture twice is byte-identical; every injected invalid
    transaction leaves the canonical encoding unchanged."""
    sc, registrar, lawyers, citizens, docs = _build_500_tx_fixture()
    txs = sc.applied
    assert len(txs) >= 500
    start = time.perf_counter()

    world_a = WorldState.genesis()
    for height, tx in enumerate(txs, start=1):
        world_a = apply_transaction(world_a, tx, height)
    world_b = WorldState.genesis()
    for height, tx in enumerate(txs, start=1):
        world_b = apply_transaction(world_b, tx, height)
    assert encode_world_state(world_a) == encode_world_state(world_b)
    assert state_hash(world_a) == state_hash(sc.world)

    # rejected transactions leave the canonical encoding untouched
    rng = random.Random(5005)
    before = encode_world_state(sc.world)
    invalid = []
    for _ in range(40):
        kind = rng.randrange(3)
        if kind == 0:  # replayed transaction -> BadNonce
            invalid.append(rng.choice(txs))
        elif kind == 1:  # non-custodian transfer -> CustodyMismatch / PermissionDenied
            doc_id, _ = rng.choice(docs)
            custodian = sc.world.documents[doc_id].current_custodian()
            outsider = rng.choice([l for l in lawyers if l.uid != custodian])
            invalid.append(
                make_transaction(
                    TransferCustody(doc_id, rng.choice(citizens).uid, ""),
                    outsider.uid, outsider.nonce + 1, 0, outsider.signing_key,
                )
            )
        else:  # citizen uploading -> PermissionDenied
            citizen = rng.choice(citizens)
            case_id = rng.choice(list(sc.world.cases))
            invalid.append(
                make_transaction(
                    UploadDocument(case_id, "x", keccak256(b"x"), keccak256(b"m"), 1),
                    citizen.uid, citizen.nonce + 1, 0, citizen.signing_key,
                )
            )
    rejected = 0
    for tx in invalid:
        try:
            apply_transaction(sc.world, tx, sc.height + 1)
        except TxRejected:
            rejected += 1
        assert encode_world_state(sc.world) == before
    assert rejected == len(invalid)
    report(f"replay determinism ({len(txs)} txs, {len(invalid)} invalid injected)", 10, start)


def test_custody_integrity():
    """Randomized transfer sequences with ~30% invalid attempts: the custody
    list stays correctly chained and every mismatch is rejected."""
    sc = Scenario()
    registrar = make_actor("Custody Registrar", Role.REGISTRAR)
    judge = make_actor("Custody Judge", Role.JUDGE)
    lawyers = [make_actor(f"Custody Lawyer {i}", Role.LAWYER) for i in range(4)]
    pet = make_actor("Custody Pet", Role.CITIZEN)
    dfd = make_actor("Custody Dfd", Role.CITIZEN)
    sc.bootstrap_registrar(registrar)
    for a in [judge, pet, dfd] + lawyers:
        sc.register(registrar, a)
    case_id = sc.file_case(registrar, "custody case", pet, dfd, lawyers)
    doc_id = sc.upload(lawyers[0], case_id, "the exhibit", b"chain me")
    by_uid = {l.uid: l for l in lawyers}

    rng = random.Random(6006)
    start = time.perf_counter()
    valid = invalid = 0
    for _ in range(400):
        doc = sc.world.documents[doc_id]
        custodian_uid = doc.current_custodian()
        if rng.random() < 0.3:
            wrong = rng.choice([l for l in lawyers if l.uid != custodian_uid])
            tx = make_transaction(
                TransferCustody(doc_id, rng.choice(lawyers).uid, "bogus"),
                wrong.uid, wrong.nonce + 1, 0, wrong.signing_key,
            )
            with pytest.raises(TxRejected) as err:
                apply_transaction(sc.world, tx, sc.height + 1)
            assert err.value.code == "CustodyMismatch"
            invalid += 1
        else:
            holder = by_uid[custodian_uid]
            target = rng.choice([l for l in lawyers if l.uid != custodian_uid])
            sc.transfer(holder, doc_id, target, f"hop {valid}")
            valid += 1

    doc = sc.world.documents[doc_id]
    assert len(doc.custody) == valid
    previous = lawyers[0].uid
    for event in doc.custody:
        assert event.from_uid == previous
        previous = event.to_uid
    assert invalid > 0
    report(f"custody integrity ({valid} valid, {invalid} rejected)", 10, start)


def test_dedup(tmp_path):
    """1 MiB stored twice: 16 chunk records then 0 new; 4-chunk shared prefix
    shares exactly 4 records."""
    rng = random.Random(7007)
    start = time.perf_counter()
    store = ChunkStore(tmp_path / "dedup")
    data = rng.randbytes(1024 * 1024)
    put_object(store, data, chunk_size=64 * 1024)
    assert store.unique_chunk_count() == 16
    put_object(store, data, chunk_size=64 * 1024)
    assert store.unique_chunk_count() == 16

    store2 = ChunkStore(tmp_path / "prefix")
    chunk = 64 * 1024
    prefix = rng.randbytes(4 * chunk)
    file_a = prefix + rng.randbytes(3 * chunk)
    file_b = prefix + rng.randbytes(5 * chunk)
    put_object(store2, file_a, chunk_size=chunk)
    count_a = store2.unique_chunk_count()
    put_object(store2, file_b, chunk_size=chunk)
    assert count_a == 7
    assert store2.unique_chunk_count() == 7 + 5  # exactly the 4 prefix chunks shared
    report("dedup", 10, start)


def test_filestore_round_trip(tmp_path):
    """200 random objects (1 B to 2 MiB): get(put(x)) == x, and injected
    chunk corruption raises IntegrityFailure."""
    rng = random.Random(8008)
    store = ChunkStore(tmp_path / "roundtrip")
    start = time.perf_counter()
    sizes = [1, 2 * 1024 * 1024]  # force both endpoints
    while len(sizes) < 200:
        sizes.append(int(2 ** rng.uniform(0, 21)))
    for i, size in enumerate(sizes):
        data = rng.randbytes(size)
        chunk_size = 4096 if rng.random() < 0.5 else 64 * 1024
        manifest = put_object(store, data, chunk_size=chunk_size)
        assert get_object(store, manifest) == data
        assert manifest.content_hash == keccak256(data)
        if i % 10 == 0:  # inject corruption, then restore
            victim = store._path(manifest.entries[rng.randrange(len(manifest.entries))][0])
            pristine = victim.read_bytes()
            mutated = bytearray(pristine)
            mutated[rng.randrange(len(mutated))] ^= 1 << rng.randrange(8)
            victim.write_bytes(bytes(mutated))
            with pytest.raises(IntegrityFailure):
                get_object(store, manifest)
            victim.write_bytes(pristine)
    report("filestore round trip (200 objects)", 30, start)


def test_consensus_convergence():
    """nodes=4 seed=42: drop 0.0 and drop 0.3 both end with four identical
    tips and world states, and replays are bit-identical."""
    start = time.perf_counter()
    schedule = demo_schedule(4, tx_count=50)

    clean_cfg = consensus.NetworkConfig(node_count=4, rng_seed=42, drop_probability=0.0)
    clean_a = consensus.simulate(clean_cfg, schedule, ticks=200)
    assert clean_a.converged(), "tips diverged with no drops"
    assert len(set(clean_a.state_hashes())) == 1

    lossy_cfg = consensus.NetworkConfig(node_count=4, rng_seed=42, drop_probability=0.3)
    lossy_a = consensus.simulate(lossy_cfg, schedule, ticks=400)  # quiescent tail after tick ~99
    assert lossy_a.converged(), "tips diverged under 30% drop after quiescence"
    assert len(set(lossy_a.state_hashes())) == 1

    clean_b = consensus.simulate(clean_cfg, schedule, ticks=200)
    lossy_b = consensus.simulate(lossy_cfg, schedule, ticks=400)
    assert clean_a.event_log() == clean_b.event_log()
    assert clean_a.tip_hashes() == clean_b.tip_hashes()
    assert lossy_a.event_log() == lossy_b.event_log()
    assert lossy_a.tip_hashes() == lossy_b.tip_hashes()
    report("consensus convergence", 30, start)


def test_crash_recovery(tmp_path):
    """Kill-after-block-50 recovers to the identical tip and state hash; a
    torn final record recovers to height 49."""
    from test_persistence import fill_node, frame_offsets

    seed = bytes(range(32))
    start = time.perf_counter()

    node = ServerNode(tmp_path / "a", node_seed=seed)
    fill_node(node, 50)
    tip = node.head()
    state = node.state_hash()
    assert tip[0] == 50
    node.close()
    revived = ServerNode(tmp_path / "a", node_seed=seed)
    assert revived.head() == tip
    assert revived.state_hash() == state
    revived.close()

    node = ServerNode(tmp_path / "b", node_seed=seed)
    fill_node(node, 50)
    node.close()
    log_path = tmp_path / "b" / "blocks.log"
    last_frame = frame_offsets(log_path)[-1]
    with open(log_path, "r+b") as fh:
        fh.truncate(last_frame + 9)
    torn = ServerNode(tmp_path / "b", node_seed=seed)
    assert torn.head()[0] == 49
    torn.close()
    report("crash recovery", 30, start)


def test_docket_ordering_property():
    """Random hearing timestamps: the judge docket is sorted ascending with
    unscheduled-last and case-number tie-breaks."""
    from test_queries import build_docket

    rng = random.Random(9009)
    start = time.perf_counter()
    for _ in range(25):
        hearings = [
            None if rng.random() < 0.25 else rng.choice([10, 20, 30, rng.randint(0, 10**10)])
            for _ in range(rng.randint(0, 10))
        ]
        sc, _, judge, *_ = build_docket(hearings)
        docket = pending_cases_for_judge(sc.world, judge.uid)
        assert len(docket) == len(hearings)
        keys = [
            ((0, c.next_hearing_at) if c.next_hearing_at is not None else (1, 0), c.case_number)
            for c in docket
        ]
        assert keys == sorted(keys)
        # spot-check the documented tie-break: equal hearings sort by number
        for left, right in zip(docket, docket[1:]):
            if left.next_hearing_at == right.next_hearing_at:
                assert left.case_number < right.case_number
    report("docket ordering property", 5, start)
