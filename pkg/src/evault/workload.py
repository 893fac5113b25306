"""Deterministic demo workloads for the consensus simulator and the CLI.

Builds a realistic signed-transaction stream (registrar onboarding, case
filings, hearings, uploads, custody transfers, document signatures) whose
ordering respects per-sender nonce chains and cross-transaction references,
then spreads it over ticks and nodes as a simulator schedule.
"""

from __future__ import annotations

from evault.contracts import (
    CaseStatus,
    FileCase,
    GrantAccess,
    RegisterIdentity,
    ScheduleHearing,
    SignDocument,
    Transaction,
    TransferCustody,
    UpdateCaseStatus,
    UploadDocument,
    WorldState,
    apply_transaction,
    make_transaction,
    tx_hash,
)
from evault.hashchain import keccak256
from evault.identity import IdentityDetails, Role, derive_uid, generate_keypair, sign


class _Party:
    def __init__(self, name: str, role: Role) -> None:
        seed = keccak256(f"workload/{role.value}/{name}".encode())
        self.signing_key, self.verify_key = generate_keypair(seed)
        self.details = IdentityDetails(name, f"WID-{name.replace(' ', '-')}", role, "demo")
        self.uid = derive_uid(self.details)
        self.nonce = 0

    def tx(self, payload, submitted_at: int) -> Transaction:
        self.nonce += 1
        return make_transaction(payload, self.uid, self.nonce, submitted_at, self.signing_key)


def demo_transactions(case_count: int = 8) -> list[Transaction]:
    """A dependency-ordered, individually valid transaction sequence.

    Applying the returned list in order from genesis succeeds; the sequence
    is also safe to seal out of order across a network because senders'
    nonce chains match list order.
    """
    registrar = _Party("Demo Registrar", Role.REGISTRAR)
    judge = _Party("Demo Judge", Role.JUDGE)
    lawyer_a = _Party("Demo Lawyer A", Role.LAWYER)
    lawyer_b = _Party("Demo Lawyer B", Role.LAWYER)
    citizen_a = _Party("Demo Citizen A", Role.CITIZEN)
    citizen_b = _Party("Demo Citizen B", Role.CITIZEN)

    txs: list[Transaction] = []
    now = 0

    def emit(party: _Party, payload) -> Transaction:
        nonlocal now
        now += 1000
        tx = party.tx(payload, now)
        txs.append(tx)
        return tx

    emit(registrar, RegisterIdentity(registrar.details, registrar.verify_key))
    for party in (judge, lawyer_a, lawyer_b, citizen_a, citizen_b):
        emit(registrar, RegisterIdentity(party.details, party.verify_key))

    for i in range(case_count):
        petitioner, defendant = (citizen_a, citizen_b) if i % 2 == 0 else (citizen_b, citizen_a)
        counsel = lawyer_a if i % 2 == 0 else lawyer_b
        filing = emit(
            registrar,
            FileCase(f"demo case {i}", petitioner.uid, defendant.uid, (counsel.uid,)),
        )
        case_id = tx_hash(filing)
        emit(judge, ScheduleHearing(case_id, 1_700_000_000_000 + i * 86_400_000))
        content = f"exhibit for demo case {i}".encode()
        upload = emit(
            counsel,
            UploadDocument(
                case_id,
                f"exhibit-{i}.txt",
                keccak256(content),
                keccak256(b"manifest:" + content),
                len(content),
            ),
        )
        doc_id = tx_hash(upload)
        emit(judge, GrantAccess(doc_id, petitioner.uid))
        emit(counsel, TransferCustody(doc_id, judge.uid, "filed with court"))
        emit(
            petitioner,
            SignDocument(doc_id, sign(petitioner.signing_key, keccak256(content))),
        )
        if i % 3 == 0:
            emit(judge, UpdateCaseStatus(case_id, CaseStatus.IN_HEARING, "first hearing"))

    # sanity: the sequence must replay cleanly (pure fold)
    world = WorldState.genesis()
    for height, tx in enumerate(txs, start=1):
        world = apply_transaction(world, tx, height)
    return txs


def demo_schedule(
    node_count: int,
    tx_count: int = 50,
    start_tick: int = 1,
    spacing: int = 2,
) -> list[tuple[int, int, Transaction]]:
    """Spread the first ``tx_count`` demo transactions across nodes: the i-th
    transaction is injected at node i mod node_count, ``spacing`` ticks apart."""
    txs = demo_transactions(case_count=max(1, (tx_count // 7) + 1))[:tx_count]
    return [
        (start_tick + i * spacing, i % node_count, tx)
        for i, tx in enumerate(txs)
    ]
