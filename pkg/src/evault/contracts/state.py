"""WorldState and the transaction fold.

WorldState is a materialized view: replaying every ledger transaction from
genesis reproduces it byte-identically (the canonical encoding below is the
equality used by tests and consensus checkpoints).  apply_transaction is a
pure function — no clocks, no randomness, no I/O — and never mutates its
input state: on success it returns a fresh state built copy-on-write, on
rejection it raises TxRejected and the caller keeps the old value.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from evault import identity as ident
from evault.contracts.permissions import Action, PermissionError_, check_permission
from evault.contracts.transactions import (
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
    status_from_tag,
    tx_hash,
)
from evault.encoding import ByteReader, ByteWriter
from evault.hashchain.keccak import Hash256, keccak256
from evault.identity import UID, Identity, Role, role_from_tag


class TxRejected(Exception):
    """Typed rejection; state is guaranteed unchanged."""

    def __init__(self, code: str, message: str) -> None:
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


@dataclass(frozen=True)
class CustodyEvent:
    from_uid: UID
    to_uid: UID
    at_height: int
    note: str = ""


@dataclass(frozen=True)
class Case:
    case_id: Hash256  # hash of the filing transaction
    case_type: str
    case_number: int  # dense from 1
    petitioner_uid: UID
    defendant_uid: UID
    lawyer_uids: frozenset[UID]
    judge_uid: UID
    status: CaseStatus
    next_hearing_at: Optional[int]
    document_ids: tuple[Hash256, ...]


@dataclass(frozen=True)
class DocumentRecord:
    doc_id: Hash256  # hash of the upload transaction
    case_id: Hash256
    title: str
    content_hash: Hash256  # whole-file Keccak-256, immutable after creation
    manifest_hash: Hash256
    size_bytes: int
    uploader_uid: UID
    uploaded_at_height: int
    acl: frozenset[UID]
    custody: tuple[CustodyEvent, ...]  # append-only
    signatures: tuple[tuple[UID, bytes, int], ...]  # (signer, sig over content_hash, height)

    def current_custodian(self) -> UID:
        return self.custody[-1].to_uid if self.custody else self.uploader_uid

    def acl_floor(self, case: Case) -> frozenset[UID]:
        return frozenset({self.uploader_uid, case.judge_uid, *case.lawyer_uids})


@dataclass(frozen=True)
class WorldState:
    identities: dict[UID, Identity]
    cases: dict[Hash256, Case]
    documents: dict[Hash256, DocumentRecord]
    next_case_number: int
    nonces: dict[UID, int]

    @staticmethod
    def genesis() -> "WorldState":
        return WorldState({}, {}, {}, 1, {})


_STATUS_ORDER = [CaseStatus.FILED, CaseStatus.IN_HEARING, CaseStatus.DECIDED, CaseStatus.CLOSED]


def _status_step_allowed(current: CaseStatus, new: CaseStatus) -> bool:
    # Self-loops carry notes; otherwise exactly one step forward.
    i, j = _STATUS_ORDER.index(current), _STATUS_ORDER.index(new)
    return j == i or j == i + 1


def _require_registered(state: WorldState, uid: UID, what: str) -> Identity:
    identity = state.identities.get(uid)
    if identity is None:
        raise TxRejected("UnknownActor", f"{what} {uid.hex()} is not registered")
    return identity


def _verify_envelope(state: WorldState, tx: Transaction) -> None:
    """Signature and nonce checks shared by every kind."""
    payload = tx.payload
    if isinstance(payload, RegisterIdentity):
        sender = state.identities.get(tx.sender_uid)
        if sender is not None:
            key = sender.public_key
        else:
            # Bootstrap: the very first registrar self-signs their own
            # registration; afterwards only registered registrars may sign.
            any_registrar = any(
                i.role is Role.REGISTRAR for i in state.identities.values()
            )
            self_uid = ident.derive_uid(payload.details)
            if (
                any_registrar
                or payload.details.role is not Role.REGISTRAR
                or tx.sender_uid != self_uid
            ):
                raise TxRejected(
                    "BadSignature",
                    f"sender {tx.sender_uid.hex()} is not registered",
                )
            key = payload.public_key
    else:
        sender = state.identities.get(tx.sender_uid)
        if sender is None:
            raise TxRejected(
                "BadSignature", f"sender {tx.sender_uid.hex()} is not registered"
            )
        key = sender.public_key
    if not ident.verify(key, tx.signing_bytes(), tx.signature):
        raise TxRejected("BadSignature", "envelope signature does not verify")
    expected = state.nonces.get(tx.sender_uid, 0) + 1
    if tx.nonce != expected:
        raise TxRejected(
            "BadNonce",
            f"sender {tx.sender_uid.hex()} expected nonce {expected}, got {tx.nonce}",
        )


_ACTION_FOR_KIND = {
    RegisterIdentity: Action.REGISTER_IDENTITY,
    FileCase: Action.FILE_CASE,
    ScheduleHearing: Action.SCHEDULE_HEARING,
    UploadDocument: Action.UPLOAD_DOCUMENT,
    GrantAccess: Action.GRANT_ACCESS,
    RevokeAccess: Action.REVOKE_ACCESS,
    TransferCustody: Action.TRANSFER_CUSTODY,
    SignDocument: Action.SIGN_DOCUMENT,
    UpdateCaseStatus: Action.UPDATE_CASE_STATUS,
}

_RESOURCE_ERROR = {
    Action.SCHEDULE_HEARING: "UnknownCase",
    Action.UPDATE_CASE_STATUS: "UnknownCase",
    Action.UPLOAD_DOCUMENT: "UnknownCase",
    Action.GRANT_ACCESS: "UnknownDocument",
    Action.REVOKE_ACCESS: "UnknownDocument",
    Action.TRANSFER_CUSTODY: "UnknownDocument",
    Action.SIGN_DOCUMENT: "UnknownDocument",
}


def _check_tx_permission(state: WorldState, tx: Transaction) -> None:
    payload = tx.payload
    if isinstance(payload, RegisterIdentity) and tx.sender_uid not in state.identities:
        return  # bootstrap registrar, already vetted in _verify_envelope
    action = _ACTION_FOR_KIND[type(payload)]
    resource = getattr(payload, "case_id", None) or getattr(payload, "doc_id", None)
    try:
        allowed = check_permission(state, tx.sender_uid, action, resource)
    except PermissionError_ as exc:
        if exc.code == "UnknownResource":
            raise TxRejected(_RESOURCE_ERROR[action], exc.message) from exc
        raise TxRejected(exc.code, exc.message) from exc
    if not allowed:
        raise TxRejected(
            "PermissionDenied",
            f"{action.value} denied for {tx.sender_uid.hex()}",
        )


def apply_transaction(state: WorldState, tx: Transaction, height: int) -> WorldState:
    """Validate and apply one transaction at ``height``; raise TxRejected on
    any failure, leaving ``state`` untouched."""
    _verify_envelope(state, tx)
    _check_tx_permission(state, tx)
    payload = tx.payload

    if isinstance(payload, RegisterIdentity):
        new_state = _apply_register(state, tx, payload, height)
    elif isinstance(payload, FileCase):
        new_state = _apply_file_case(state, tx, payload)
    elif isinstance(payload, ScheduleHearing):
        new_state = _apply_schedule(state, payload)
    elif isinstance(payload, UploadDocument):
        new_state = _apply_upload(state, tx, payload, height)
    elif isinstance(payload, GrantAccess):
        new_state = _apply_grant(state, payload)
    elif isinstance(payload, RevokeAccess):
        new_state = _apply_revoke(state, payload)
    elif isinstance(payload, TransferCustody):
        new_state = _apply_transfer(state, tx, payload, height)
    elif isinstance(payload, SignDocument):
        new_state = _apply_sign(state, tx, payload, height)
    elif isinstance(payload, UpdateCaseStatus):
        new_state = _apply_status(state, payload)
    else:  # pragma: no cover
        raise TxRejected("PermissionDenied", f"unhandled kind {tx.kind}")

    nonces = dict(new_state.nonces)
    nonces[tx.sender_uid] = tx.nonce
    return replace(new_state, nonces=nonces)


def _apply_register(
    state: WorldState, tx: Transaction, payload: RegisterIdentity, height: int
) -> WorldState:
    try:
        uid = ident.derive_uid(payload.details)
    except ident.EmptyField as exc:
        raise TxRejected("PermissionDenied", f"invalid details: {exc}") from exc
    if len(payload.public_key) != ident.VERIFY_KEY_LEN:
        raise TxRejected("BadSignature", "public_key must be 32 bytes")
    if uid in state.identities:
        raise TxRejected("DuplicateIdentity", f"uid {uid.hex()} already registered")
    if any(i.public_key == payload.public_key for i in state.identities.values()):
        raise TxRejected("DuplicateIdentity", "public key already bound to an identity")
    identities = dict(state.identities)
    identities[uid] = Identity(uid, payload.details.role, payload.public_key, height)
    return replace(state, identities=identities)


def _open_case_count(state: WorldState, judge_uid: UID) -> int:
    return sum(
        1
        for c in state.cases.values()
        if c.judge_uid == judge_uid and c.status is not CaseStatus.CLOSED
    )


def _apply_file_case(state: WorldState, tx: Transaction, payload: FileCase) -> WorldState:
    _require_registered(state, payload.petitioner_uid, "petitioner")
    _require_registered(state, payload.defendant_uid, "defendant")
    for lawyer_uid in payload.lawyer_uids:
        lawyer = _require_registered(state, lawyer_uid, "counsel")
        if lawyer.role is not Role.LAWYER:
            raise TxRejected(
                "PermissionDenied", f"counsel {lawyer_uid.hex()} is not a lawyer"
            )
    judges = sorted(
        (i.uid for i in state.identities.values() if i.role is Role.JUDGE),
        key=lambda uid: (_open_case_count(state, uid), uid),
    )
    if not judges:
        raise TxRejected("NoJudgeRegistered", "no judge registered to take the case")
    case_id = tx_hash(tx)
    case = Case(
        case_id=case_id,
        case_type=payload.case_type,
        case_number=state.next_case_number,
        petitioner_uid=payload.petitioner_uid,
        defendant_uid=payload.defendant_uid,
        lawyer_uids=frozenset(payload.lawyer_uids),
        judge_uid=judges[0],
        status=CaseStatus.FILED,
        next_hearing_at=None,
        document_ids=(),
    )
    cases = dict(state.cases)
    cases[case_id] = case
    return replace(state, cases=cases, next_case_number=state.next_case_number + 1)


def _apply_schedule(state: WorldState, payload: ScheduleHearing) -> WorldState:
    case = state.cases[payload.case_id]
    if case.status is CaseStatus.CLOSED:
        raise TxRejected("IllegalStatusTransition", "cannot schedule a hearing on a Closed case")
    cases = dict(state.cases)
    cases[payload.case_id] = replace(case, next_hearing_at=payload.hearing_at)
    return replace(state, cases=cases)


def _apply_upload(
    state: WorldState, tx: Transaction, payload: UploadDocument, height: int
) -> WorldState:
    case = state.cases[payload.case_id]
    doc_id = tx_hash(tx)
    doc = DocumentRecord(
        doc_id=doc_id,
        case_id=payload.case_id,
        title=payload.doc_title,
        content_hash=payload.content_hash,
        manifest_hash=payload.manifest_hash,
        size_bytes=payload.size_bytes,
        uploader_uid=tx.sender_uid,
        uploaded_at_height=height,
        acl=frozenset({tx.sender_uid, case.judge_uid, *case.lawyer_uids}),
        custody=(),
        signatures=(),
    )
    documents = dict(state.documents)
    documents[doc_id] = doc
    cases = dict(state.cases)
    cases[case.case_id] = replace(case, document_ids=case.document_ids + (doc_id,))
    return replace(state, cases=cases, documents=documents)


def _apply_grant(state: WorldState, payload: GrantAccess) -> WorldState:
    doc = state.documents[payload.doc_id]
    _require_registered(state, payload.grantee_uid, "grantee")
    if payload.grantee_uid in doc.acl:
        return state  # idempotent
    documents = dict(state.documents)
    documents[payload.doc_id] = replace(doc, acl=doc.acl | {payload.grantee_uid})
    return replace(state, documents=documents)


def _apply_revoke(state: WorldState, payload: RevokeAccess) -> WorldState:
    doc = state.documents[payload.doc_id]
    case = state.cases[doc.case_id]
    if payload.grantee_uid in doc.acl_floor(case):
        raise TxRejected(
            "PermissionDenied",
            "uploader, case judge and case counsel cannot be revoked",
        )
    if payload.grantee_uid not in doc.acl:
        return state  # idempotent
    documents = dict(state.documents)
    documents[payload.doc_id] = replace(doc, acl=doc.acl - {payload.grantee_uid})
    return replace(state, documents=documents)


def _apply_transfer(
    state: WorldState, tx: Transaction, payload: TransferCustody, height: int
) -> WorldState:
    doc = state.documents[payload.doc_id]
    _require_registered(state, payload.to_uid, "transferee")
    custodian = doc.current_custodian()
    if tx.sender_uid != custodian:
        raise TxRejected(
            "CustodyMismatch",
            f"current custodian is {custodian.hex()}, not {tx.sender_uid.hex()}",
        )
    event = CustodyEvent(tx.sender_uid, payload.to_uid, height, payload.note)
    documents = dict(state.documents)
    documents[payload.doc_id] = replace(doc, custody=doc.custody + (event,))
    return replace(state, documents=documents)


def _apply_sign(
    state: WorldState, tx: Transaction, payload: SignDocument, height: int
) -> WorldState:
    doc = state.documents[payload.doc_id]
    signer = state.identities[tx.sender_uid]
    if not ident.verify(signer.public_key, doc.content_hash, payload.content_signature):
        raise TxRejected(
            "BadSignature", "content signature does not verify over the stored content hash"
        )
    documents = dict(state.documents)
    documents[payload.doc_id] = replace(
        doc,
        signatures=doc.signatures + ((tx.sender_uid, payload.content_signature, height),),
    )
    return replace(state, documents=documents)


def _apply_status(state: WorldState, payload: UpdateCaseStatus) -> WorldState:
    case = state.cases[payload.case_id]
    if not _status_step_allowed(case.status, payload.status):
        raise TxRejected(
            "IllegalStatusTransition",
            f"{case.status.value} -> {payload.status.value} is not allowed",
        )
    cases = dict(state.cases)
    cases[payload.case_id] = replace(case, status=payload.status)
    return replace(state, cases=cases)


# --- canonical encoding -----------------------------------------------------
#
# Maps are serialized in ascending key order; byte-identical encodings are the
# definition of state equality across nodes and across replays.


def encode_world_state(state: WorldState) -> bytes:
    w = ByteWriter()
    w.count(len(state.identities))
    for uid in sorted(state.identities):
        i = state.identities[uid]
        w.raw(uid).u8(i.role.tag).bytes(i.public_key).u64(i.registered_at)
    w.count(len(state.cases))
    for case_id in sorted(state.cases):
        _encode_case(w, state.cases[case_id])
    w.count(len(state.documents))
    for doc_id in sorted(state.documents):
        _encode_document(w, state.documents[doc_id])
    w.u64(state.next_case_number)
    w.count(len(state.nonces))
    for uid in sorted(state.nonces):
        w.raw(uid).u64(state.nonces[uid])
    return w.getvalue()


def state_hash(state: WorldState) -> Hash256:
    return keccak256(encode_world_state(state))


def _encode_case(w: ByteWriter, case: Case) -> None:
    w.raw(case.case_id)
    w.str(case.case_type)
    w.u64(case.case_number)
    w.raw(case.petitioner_uid)
    w.raw(case.defendant_uid)
    w.count(len(case.lawyer_uids))
    for uid in sorted(case.lawyer_uids):
        w.raw(uid)
    w.raw(case.judge_uid)
    w.u8(case.status.tag)
    if case.next_hearing_at is None:
        w.u8(0)
    else:
        w.u8(1).u64(case.next_hearing_at)
    w.count(len(case.document_ids))
    for doc_id in case.document_ids:
        w.raw(doc_id)


def _encode_document(w: ByteWriter, doc: DocumentRecord) -> None:
    w.raw(doc.doc_id)
    w.raw(doc.case_id)
    w.str(doc.title)
    w.raw(doc.content_hash)
    w.raw(doc.manifest_hash)
    w.u64(doc.size_bytes)
    w.raw(doc.uploader_uid)
    w.u64(doc.uploaded_at_height)
    w.count(len(doc.acl))
    for uid in sorted(doc.acl):
        w.raw(uid)
    w.count(len(doc.custody))
    for ev in doc.custody:
        w.raw(ev.from_uid).raw(ev.to_uid).u64(ev.at_height).str(ev.note)
    w.count(len(doc.signatures))
    for uid, sig, height in doc.signatures:
        w.raw(uid).bytes(sig).u64(height)


def decode_world_state(data: bytes) -> WorldState:
    r = ByteReader(data)
    identities: dict[UID, Identity] = {}
    for _ in range(r.count()):
        uid = r.raw(32)
        role = role_from_tag(r.u8())
        pk = r.bytes()
        height = r.u64()
        identities[uid] = Identity(uid, role, pk, height)
    cases: dict[Hash256, Case] = {}
    for _ in range(r.count()):
        case = _decode_case(r)
        cases[case.case_id] = case
    documents: dict[Hash256, DocumentRecord] = {}
    for _ in range(r.count()):
        doc = _decode_document(r)
        documents[doc.doc_id] = doc
    next_case_number = r.u64()
    nonces: dict[UID, int] = {}
    for _ in range(r.count()):
        uid = r.raw(32)
        nonces[uid] = r.u64()
    r.expect_end()
    return WorldState(identities, cases, documents, next_case_number, nonces)


def _decode_case(r: ByteReader) -> Case:
    case_id = r.raw(32)
    case_type = r.str()
    case_number = r.u64()
    petitioner = r.raw(32)
    defendant = r.raw(32)
    lawyers = frozenset(r.raw(32) for _ in range(r.count()))
    judge = r.raw(32)
    status = status_from_tag(r.u8())
    hearing = r.u64() if r.u8() else None
    docs = tuple(r.raw(32) for _ in range(r.count()))
    return Case(
        case_id, case_type, case_number, petitioner, defendant, lawyers, judge,
        status, hearing, docs,
    )


def _decode_document(r: ByteReader) -> DocumentRecord:
    doc_id = r.raw(32)
    case_id = r.raw(32)
    title = r.str()
    content_hash = r.raw(32)
    manifest_hash = r.raw(32)
    size_bytes = r.u64()
    uploader = r.raw(32)
    uploaded_at = r.u64()
    acl = frozenset(r.raw(32) for _ in range(r.count()))
    custody = tuple(
        CustodyEvent(r.raw(32), r.raw(32), r.u64(), r.str()) for _ in range(r.count())
    )
    signatures = tuple((r.raw(32), r.bytes(), r.u64()) for _ in range(r.count()))
    return DocumentRecord(
        doc_id, case_id, title, content_hash, manifest_hash, size_bytes, uploader,
        uploaded_at, acl, custody, signatures,
    )
