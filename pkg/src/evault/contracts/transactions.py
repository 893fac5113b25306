"""Transaction envelopes: typed state-transition requests, signed by their
sender.

Every transaction is (payload, sender_uid, nonce, submitted_at, signature)
where the signature covers the canonical encoding of all prior fields.  The
transaction hash commits to the complete envelope including the signature,
so any byte of a sealed transaction is tamper-evident through the block's
Merkle root.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Union

from evault import identity as ident
from evault.encoding import ByteReader, ByteWriter, DecodeError
from evault.hashchain.keccak import Hash256, keccak256
from evault.identity import UID, IdentityDetails, role_from_tag


class CaseStatus(enum.Enum):
    FILED = "Filed"
    IN_HEARING = "InHearing"
    DECIDED = "Decided"
    CLOSED = "Closed"

    @property
    def tag(self) -> int:
        return _STATUS_TAGS[self]


_STATUS_TAGS = {
    CaseStatus.FILED: 0,
    CaseStatus.IN_HEARING: 1,
    CaseStatus.DECIDED: 2,
    CaseStatus.CLOSED: 3,
}
_STATUS_BY_TAG = {tag: s for s, tag in _STATUS_TAGS.items()}


def status_from_tag(tag: int) -> CaseStatus:
    try:
        return _STATUS_BY_TAG[tag]
    except KeyError:
        raise DecodeError(f"unknown case status tag {tag}") from None


@dataclass(frozen=True)
class RegisterIdentity:
    details: IdentityDetails
    public_key: bytes

    TAG = 0

    def encode_payload(self, w: ByteWriter) -> None:
        w.raw(self.details.encode())
        w.bytes(self.public_key)


@dataclass(frozen=True)
class FileCase:
    case_type: str
    petitioner_uid: UID
    defendant_uid: UID
    lawyer_uids: tuple[UID, ...]

    TAG = 1

    def encode_payload(self, w: ByteWriter) -> None:
        w.str(self.case_type)
        w.raw(self.petitioner_uid)
        w.raw(self.defendant_uid)
        w.count(len(self.lawyer_uids))
        for uid in self.lawyer_uids:
            w.raw(uid)


@dataclass(frozen=True)
class ScheduleHearing:
    case_id: Hash256
    hearing_at: int  # ms since epoch

    TAG = 2

    def encode_payload(self, w: ByteWriter) -> None:
        w.raw(self.case_id)
        w.u64(self.hearing_at)


@dataclass(frozen=True)
class UploadDocument:
    case_id: Hash256
    doc_title: str
    content_hash: Hash256  # keccak256 of the whole plaintext file
    manifest_hash: Hash256  # filestore manifest commitment (keys omitted)
    size_bytes: int

    TAG = 3

    def encode_payload(self, w: ByteWriter) -> None:
        w.raw(self.case_id)
        w.str(self.doc_title)
        w.raw(self.content_hash)
        w.raw(self.manifest_hash)
        w.u64(self.size_bytes)


@dataclass(frozen=True)
class GrantAccess:
    doc_id: Hash256
    grantee_uid: UID

    TAG = 4

    def encode_payload(self, w: ByteWriter) -> None:
        w.raw(self.doc_id)
        w.raw(self.grantee_uid)


@dataclass(frozen=True)
class RevokeAccess:
    doc_id: Hash256
    grantee_uid: UID

    TAG = 5

    def encode_payload(self, w: ByteWriter) -> None:
        w.raw(self.doc_id)
        w.raw(self.grantee_uid)


@dataclass(frozen=True)
class TransferCustody:
    doc_id: Hash256
    to_uid: UID
    note: str = ""

    TAG = 6

    def encode_payload(self, w: ByteWriter) -> None:
        w.raw(self.doc_id)
        w.raw(self.to_uid)
        w.str(self.note)


@dataclass(frozen=True)
class SignDocument:
    """Attests to the document's registered content: content_signature is the
    sender's signature over the stored content_hash (not over file bytes)."""

    doc_id: Hash256
    content_signature: bytes

    TAG = 7

    def encode_payload(self, w: ByteWriter) -> None:
        w.raw(self.doc_id)
        w.bytes(self.content_signature)


@dataclass(frozen=True)
class UpdateCaseStatus:
    case_id: Hash256
    status: CaseStatus
    note: str = ""

    TAG = 8

    def encode_payload(self, w: ByteWriter) -> None:
        w.raw(self.case_id)
        w.u8(self.status.tag)
        w.str(self.note)


Payload = Union[
    RegisterIdentity,
    FileCase,
    ScheduleHearing,
    UploadDocument,
    GrantAccess,
    RevokeAccess,
    TransferCustody,
    SignDocument,
    UpdateCaseStatus,
]

PAYLOAD_TYPES: dict[int, type] = {
    cls.TAG: cls
    for cls in (
        RegisterIdentity,
        FileCase,
        ScheduleHearing,
        UploadDocument,
        GrantAccess,
        RevokeAccess,
        TransferCustody,
        SignDocument,
        UpdateCaseStatus,
    )
}

KIND_NAMES: dict[int, str] = {tag: cls.__name__ for tag, cls in PAYLOAD_TYPES.items()}


@dataclass(frozen=True)
class Transaction:
    payload: Payload
    sender_uid: UID
    nonce: int  # per-sender counter, starts at 1
    submitted_at: int  # ms since epoch, informational
    signature: bytes

    @property
    def kind(self) -> str:
        return type(self.payload).__name__

    def signing_bytes(self) -> bytes:
        w = ByteWriter()
        w.u8(self.payload.TAG)
        self.payload.encode_payload(w)
        w.raw(self.sender_uid)
        w.u64(self.nonce)
        w.u64(self.submitted_at)
        return w.getvalue()

    def encode(self) -> bytes:
        w = ByteWriter()
        w.raw(self.signing_bytes())
        w.bytes(self.signature)
        return w.getvalue()


def tx_hash(tx: Transaction) -> Hash256:
    return keccak256(tx.encode())


def make_transaction(
    payload: Payload,
    sender_uid: UID,
    nonce: int,
    submitted_at: int,
    signing_key: bytes,
) -> Transaction:
    """Build and sign a transaction envelope with the sender's key."""
    unsigned = Transaction(payload, sender_uid, nonce, submitted_at, b"")
    sig = ident.sign(signing_key, unsigned.signing_bytes())
    return Transaction(payload, sender_uid, nonce, submitted_at, sig)


def _decode_payload(r: ByteReader, tag: int) -> Payload:
    if tag == RegisterIdentity.TAG:
        full_name = r.str()
        national_id = r.str()
        role = role_from_tag(r.u8())
        contact = r.str()
        details = IdentityDetails(full_name, national_id, role, contact)
        return RegisterIdentity(details, r.bytes())
    if tag == FileCase.TAG:
        case_type = r.str()
        pet = r.raw(32)
        dfd = r.raw(32)
        n = r.count()
        lawyers = tuple(r.raw(32) for _ in range(n))
        return FileCase(case_type, pet, dfd, lawyers)
    if tag == ScheduleHearing.TAG:
        return ScheduleHearing(r.raw(32), r.u64())
    if tag == UploadDocument.TAG:
        return UploadDocument(r.raw(32), r.str(), r.raw(32), r.raw(32), r.u64())
    if tag == GrantAccess.TAG:
        return GrantAccess(r.raw(32), r.raw(32))
    if tag == RevokeAccess.TAG:
        return RevokeAccess(r.raw(32), r.raw(32))
    if tag == TransferCustody.TAG:
        return TransferCustody(r.raw(32), r.raw(32), r.str())
    if tag == SignDocument.TAG:
        return SignDocument(r.raw(32), r.bytes())
    if tag == UpdateCaseStatus.TAG:
        return UpdateCaseStatus(r.raw(32), status_from_tag(r.u8()), r.str())
    raise DecodeError(f"unknown transaction kind tag {tag}")


def read_transaction(r: ByteReader) -> Transaction:
    tag = r.u8()
    try:
        payload = _decode_payload(r, tag)
    except ValueError as exc:
        raise DecodeError(str(exc)) from exc
    sender = r.raw(32)
    nonce = r.u64()
    submitted_at = r.u64()
    signature = r.bytes()
    return Transaction(payload, sender, nonce, submitted_at, signature)


def decode_transaction(data: bytes) -> Transaction:
    r = ByteReader(data)
    tx = read_transaction(r)
    r.expect_end()
    return tx
