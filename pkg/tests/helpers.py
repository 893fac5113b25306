"""Shared fixture machinery: actors with keys and nonce counters, and a
scenario builder that applies signed transactions to a world state the same
way a sealed chain would."""

from __future__ import annotations

from dataclasses import dataclass, field

from evault.contracts import (
    CaseStatus,
    FileCase,
    GrantAccess,
    RegisterIdentity,
    RevokeAccess,
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


@dataclass
class Actor:
    details: IdentityDetails
    signing_key: bytes
    verify_key: bytes
    nonce: int = 0

    @property
    def uid(self) -> bytes:
        return derive_uid(self.details)

    def next_nonce(self) -> int:
        self.nonce += 1
        return self.nonce


def make_actor(name: str, role: Role, national_id: str | None = None) -> Actor:
    seed = keccak256(f"seed/{role.value}/{name}".encode())
    sk, vk = generate_keypair(seed)
    details = IdentityDetails(
        full_name=name,
        national_id=national_id or f"NID-{name.replace(' ', '-')}",
        role=role,
        contact=f"{name.split()[0].lower()}@court.example",
    )
    return Actor(details, sk, vk)


@dataclass
class Scenario:
    """A world being built one applied transaction at a time."""

    world: WorldState = field(default_factory=WorldState.genesis)
    height: int = 0
    applied: list[Transaction] = field(default_factory=list)

    def apply(self, tx: Transaction) -> WorldState:
        self.height += 1
        self.world = apply_transaction(self.world, tx, self.height)
        self.applied.append(tx)
        return self.world

    def register(self, registrar: Actor, actor: Actor) -> bytes:
        tx = make_transaction(
            RegisterIdentity(actor.details, actor.verify_key),
            registrar.uid,
            registrar.next_nonce(),
            submitted_at=self.height * 1000,
            signing_key=registrar.signing_key,
        )
        self.apply(tx)
        return actor.uid

    def bootstrap_registrar(self, registrar: Actor) -> bytes:
        """The first registrar self-signs their own registration."""
        tx = make_transaction(
            RegisterIdentity(registrar.details, registrar.verify_key),
            registrar.uid,
            registrar.next_nonce(),
            submitted_at=0,
            signing_key=registrar.signing_key,
        )
        self.apply(tx)
        return registrar.uid

    def file_case(
        self,
        registrar: Actor,
        case_type: str,
        petitioner: Actor,
        defendant: Actor,
        lawyers: list[Actor],
    ) -> bytes:
        tx = make_transaction(
            FileCase(case_type, petitioner.uid, defendant.uid, tuple(a.uid for a in lawyers)),
            registrar.uid,
            registrar.next_nonce(),
            submitted_at=self.height * 1000,
            signing_key=registrar.signing_key,
        )
        self.apply(tx)
        return tx_hash(tx)

    def schedule(self, judge: Actor, case_id: bytes, hearing_at: int) -> None:
        tx = make_transaction(
            ScheduleHearing(case_id, hearing_at),
            judge.uid,
            judge.next_nonce(),
            submitted_at=self.height * 1000,
            signing_key=judge.signing_key,
        )
        self.apply(tx)

    def upload(self, lawyer: Actor, case_id: bytes, title: str, content: bytes) -> bytes:
        tx = make_transaction(
            UploadDocument(case_id, title, keccak256(content), keccak256(b"manifest:" + content), len(content)),
            lawyer.uid,
            lawyer.next_nonce(),
            submitted_at=self.height * 1000,
            signing_key=lawyer.signing_key,
        )
        self.apply(tx)
        return tx_hash(tx)

    def grant(self, granter: Actor, doc_id: bytes, grantee: Actor) -> None:
        tx = make_transaction(
            GrantAccess(doc_id, grantee.uid),
            granter.uid,
            granter.next_nonce(),
            submitted_at=self.height * 1000,
            signing_key=granter.signing_key,
        )
        self.apply(tx)

    def revoke(self, judge: Actor, doc_id: bytes, grantee: Actor) -> None:
        tx = make_transaction(
            RevokeAccess(doc_id, grantee.uid),
            judge.uid,
            judge.next_nonce(),
            submitted_at=self.height * 1000,
            signing_key=judge.signing_key,
        )
        self.apply(tx)

    def transfer(self, holder: Actor, doc_id: bytes, to: Actor, note: str = "") -> None:
        tx = make_transaction(
            TransferCustody(doc_id, to.uid, note),
            holder.uid,
            holder.next_nonce(),
            submitted_at=self.height * 1000,
            signing_key=holder.signing_key,
        )
        self.apply(tx)

    def sign_doc(self, signer: Actor, doc_id: bytes) -> None:
        content_hash = self.world.documents[doc_id].content_hash
        tx = make_transaction(
            SignDocument(doc_id, sign(signer.signing_key, content_hash)),
            signer.uid,
            signer.next_nonce(),
            submitted_at=self.height * 1000,
            signing_key=signer.signing_key,
        )
        self.apply(tx)

    def update_status(self, judge: Actor, case_id: bytes, status: CaseStatus, note: str = "") -> None:
        tx = make_transaction(
            UpdateCaseStatus(case_id, status, note),
            judge.uid,
            judge.next_nonce(),
            submitted_at=self.height * 1000,
            signing_key=judge.signing_key,
        )
        self.apply(tx)


@dataclass
class Courtroom:
    """Standard four-role cast plus two cases, used across test modules."""

    scenario: Scenario
    registrar: Actor
    judge: Actor
    judge2: Actor
    lawyer: Actor
    lawyer2: Actor
    citizen: Actor
    citizen2: Actor
    case_id: bytes
    case2_id: bytes

    @property
    def world(self) -> WorldState:
        return self.scenario.world

    def actor_by_uid(self, uid: bytes) -> Actor:
        for actor in (
            self.registrar, self.judge, self.judge2, self.lawyer, self.lawyer2,
            self.citizen, self.citizen2,
        ):
            if actor.uid == uid:
                return actor
        raise KeyError(uid.hex())

    def judge_of(self, case_id: bytes) -> Actor:
        return self.actor_by_uid(self.world.cases[case_id].judge_uid)


def build_courtroom() -> Courtroom:
    sc = Scenario()
    registrar = make_actor("Asha Registrar", Role.REGISTRAR)
    judge = make_actor("Meera Judge", Role.JUDGE)
    judge2 = make_actor("Vikram Judge", Role.JUDGE)
    lawyer = make_actor("Ravi Lawyer", Role.LAWYER)
    lawyer2 = make_actor("Sana Lawyer", Role.LAWYER)
    citizen = make_actor("Kiran Citizen", Role.CITIZEN)
    citizen2 = make_actor("Devi Citizen", Role.CITIZEN)

    sc.bootstrap_registrar(registrar)
    for actor in (judge, judge2, lawyer, lawyer2, citizen, citizen2):
        sc.register(registrar, actor)
    case_id = sc.file_case(registrar, "property dispute", citizen, citizen2, [lawyer])
    case2_id = sc.file_case(registrar, "contract breach", citizen2, citizen, [lawyer2])
    return Courtroom(
        sc, registrar, judge, judge2, lawyer, lawyer2, citizen, citizen2, case_id, case2_id
    )
