"""JSON views of domain objects for the HTTP API and CLI.

All hashes, UIDs, keys and signatures travel as lowercase hex; timestamps
are integer milliseconds.  The JSON envelope is a *transport* encoding:
signatures are always computed over the canonical binary encoding, and the
server re-derives those bytes after decoding, so a JSON round trip cannot
change what was signed.
"""

from __future__ import annotations

from typing import Any

from evault.contracts.state import Case, DocumentRecord, WorldState
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
    tx_hash,
)
from evault.encoding import DecodeError, from_hex, to_hex
from evault.hashchain.block import Block, block_hash
from evault.identity import IdentityDetails, Role


class WireError(ValueError):
    """Malformed JSON envelope (missing field, bad hex, unknown kind)."""


def _hex32(value: Any, field: str) -> bytes:
    if not isinstance(value, str):
        raise WireError(f"{field} must be a hex string")
    raw = _hex(value, field)
    if len(raw) != 32:
        raise WireError(f"{field} must be 32 bytes of hex, got {len(raw)}")
    return raw


def _hex(value: Any, field: str) -> bytes:
    if not isinstance(value, str):
        raise WireError(f"{field} must be a hex string")
    try:
        return from_hex(value)
    except DecodeError as exc:
        raise WireError(f"{field}: {exc}") from exc


def _int(value: Any, field: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise WireError(f"{field} must be a non-negative integer")
    return value


def _str(value: Any, field: str) -> str:
    if not isinstance(value, str):
        raise WireError(f"{field} must be a string")
    return value


def _role(value: Any) -> Role:
    try:
        return Role(_str(value, "role"))
    except ValueError as exc:
        raise WireError(f"unknown role {value!r}") from exc


def _status(value: Any) -> CaseStatus:
    try:
        return CaseStatus(_str(value, "status"))
    except ValueError as exc:
        raise WireError(f"unknown status {value!r}") from exc


# -- transactions -------------------------------------------------------------


def tx_to_json(tx: Transaction) -> dict:
    return {
        "kind": tx.kind,
        "payload": _payload_to_json(tx.payload),
        "sender_uid": to_hex(tx.sender_uid),
        "nonce": tx.nonce,
        "submitted_at": tx.submitted_at,
        "signature": to_hex(tx.signature),
    }


def _payload_to_json(payload) -> dict:
    if isinstance(payload, RegisterIdentity):
        return {
            "full_name": payload.details.full_name,
            "national_id": payload.details.national_id,
            "role": payload.details.role.value,
            "contact": payload.details.contact,
            "public_key": to_hex(payload.public_key),
        }
    if isinstance(payload, FileCase):
        return {
            "case_type": payload.case_type,
            "petitioner_uid": to_hex(payload.petitioner_uid),
            "defendant_uid": to_hex(payload.defendant_uid),
            "lawyer_uids": [to_hex(u) for u in payload.lawyer_uids],
        }
    if isinstance(payload, ScheduleHearing):
        return {"case_id": to_hex(payload.case_id), "hearing_at": payload.hearing_at}
    if isinstance(payload, UploadDocument):
        return {
            "case_id": to_hex(payload.case_id),
            "doc_title": payload.doc_title,
            "content_hash": to_hex(payload.content_hash),
            "manifest_hash": to_hex(payload.manifest_hash),
            "size_bytes": payload.size_bytes,
        }
    if isinstance(payload, (GrantAccess, RevokeAccess)):
        return {"doc_id": to_hex(payload.doc_id), "grantee_uid": to_hex(payload.grantee_uid)}
    if isinstance(payload, TransferCustody):
        return {
            "doc_id": to_hex(payload.doc_id),
            "to_uid": to_hex(payload.to_uid),
            "note": payload.note,
        }
    if isinstance(payload, SignDocument):
        return {
            "doc_id": to_hex(payload.doc_id),
            "content_signature": to_hex(payload.content_signature),
        }
    if isinstance(payload, UpdateCaseStatus):
        return {
            "case_id": to_hex(payload.case_id),
            "status": payload.status.value,
            "note": payload.note,
        }
    raise WireError(f"unhandled payload type {type(payload).__name__}")


def _payload_from_json(kind: str, p: dict):
    if kind == "RegisterIdentity":
        details = IdentityDetails(
            _str(p.get("full_name"), "full_name"),
            _str(p.get("national_id"), "national_id"),
            _role(p.get("role")),
            _str(p.get("contact", ""), "contact"),
        )
        return RegisterIdentity(details, _hex(p.get("public_key"), "public_key"))
    if kind == "FileCase":
        lawyers = p.get("lawyer_uids", [])
        if not isinstance(lawyers, list):
            raise WireError("lawyer_uids must be a list")
        return FileCase(
            _str(p.get("case_type"), "case_type"),
            _hex32(p.get("petitioner_uid"), "petitioner_uid"),
            _hex32(p.get("defendant_uid"), "defendant_uid"),
            tuple(_hex32(u, "lawyer_uids[]") for u in lawyers),
        )
    if kind == "ScheduleHearing":
        return ScheduleHearing(_hex32(p.get("case_id"), "case_id"), _int(p.get("hearing_at"), "hearing_at"))
    if kind == "UploadDocument":
        return UploadDocument(
            _hex32(p.get("case_id"), "case_id"),
            _str(p.get("doc_title"), "doc_title"),
            _hex32(p.get("content_hash"), "content_hash"),
            _hex32(p.get("manifest_hash"), "manifest_hash"),
            _int(p.get("size_bytes"), "size_bytes"),
        )
    if kind == "GrantAccess":
        return GrantAccess(_hex32(p.get("doc_id"), "doc_id"), _hex32(p.get("grantee_uid"), "grantee_uid"))
    if kind == "RevokeAccess":
        return RevokeAccess(_hex32(p.get("doc_id"), "doc_id"), _hex32(p.get("grantee_uid"), "grantee_uid"))
    if kind == "TransferCustody":
        return TransferCustody(
            _hex32(p.get("doc_id"), "doc_id"),
            _hex32(p.get("to_uid"), "to_uid"),
            _str(p.get("note", ""), "note"),
        )
    if kind == "SignDocument":
        return SignDocument(
            _hex32(p.get("doc_id"), "doc_id"),
            _hex(p.get("content_signature"), "content_signature"),
        )
    if kind == "UpdateCaseStatus":
        return UpdateCaseStatus(
            _hex32(p.get("case_id"), "case_id"),
            _status(p.get("status")),
            _str(p.get("note", ""), "note"),
        )
    raise WireError(f"unknown transaction kind {kind!r}")


def tx_from_json(body: dict) -> Transaction:
    if not isinstance(body, dict):
        raise WireError("transaction envelope must be a JSON object")
    payload_json = body.get("payload")
    if not isinstance(payload_json, dict):
        raise WireError("payload must be a JSON object")
    payload = _payload_from_json(_str(body.get("kind"), "kind"), payload_json)
    return Transaction(
        payload=payload,
        sender_uid=_hex32(body.get("sender_uid"), "sender_uid"),
        nonce=_int(body.get("nonce"), "nonce"),
        submitted_at=_int(body.get("submitted_at"), "submitted_at"),
        signature=_hex(body.get("signature"), "signature"),
    )


# -- read views ---------------------------------------------------------------


def case_to_json(case: Case) -> dict:
    return {
        "case_id": to_hex(case.case_id),
        "case_type": case.case_type,
        "case_number": case.case_number,
        "petitioner_uid": to_hex(case.petitioner_uid),
        "defendant_uid": to_hex(case.defendant_uid),
        "lawyer_uids": sorted(to_hex(u) for u in case.lawyer_uids),
        "judge_uid": to_hex(case.judge_uid),
        "status": case.status.value,
        "next_hearing_at": case.next_hearing_at,
        "document_ids": [to_hex(d) for d in case.document_ids],
    }


def document_to_json(doc: DocumentRecord) -> dict:
    return {
        "doc_id": to_hex(doc.doc_id),
        "case_id": to_hex(doc.case_id),
        "title": doc.title,
        "content_hash": to_hex(doc.content_hash),
        "manifest_hash": to_hex(doc.manifest_hash),
        "size_bytes": doc.size_bytes,
        "uploader_uid": to_hex(doc.uploader_uid),
        "uploaded_at_height": doc.uploaded_at_height,
        "acl": sorted(to_hex(u) for u in doc.acl),
        "custody": [
            {
                "from_uid": to_hex(ev.from_uid),
                "to_uid": to_hex(ev.to_uid),
                "at_height": ev.at_height,
                "note": ev.note,
            }
            for ev in doc.custody
        ],
        "signatures": [
            {"signer_uid": to_hex(uid), "signature": to_hex(sig), "at_height": height}
            for uid, sig, height in doc.signatures
        ],
    }


def block_to_json(block: Block) -> dict:
    return {
        "height": block.header.height,
        "hash": to_hex(block_hash(block.header)),
        "parent_hash": to_hex(block.header.parent_hash),
        "merkle_root": to_hex(block.header.merkle_root),
        "timestamp": block.header.timestamp,
        "proposer": to_hex(block.header.proposer),
        "nonce": block.header.nonce,
        "transactions": [tx_to_json(tx) for tx in block.transactions],
        "tx_hashes": [to_hex(tx_hash(tx)) for tx in block.transactions],
        "signature": to_hex(block.signature),
    }


def identity_to_json(state: WorldState, uid: bytes) -> dict | None:
    identity = state.identities.get(uid)
    if identity is None:
        return None
    return {
        "uid": to_hex(identity.uid),
        "role": identity.role.value,
        "public_key": to_hex(identity.public_key),
        "registered_at": identity.registered_at,
        "nonce": state.nonces.get(uid, 0),
    }


def block_from_json(body: dict) -> Block:
    from evault.hashchain.block import BlockHeader

    header = BlockHeader(
        height=_int(body.get("height"), "height"),
        parent_hash=_hex32(body.get("parent_hash"), "parent_hash"),
        merkle_root=_hex32(body.get("merkle_root"), "merkle_root"),
        timestamp=_int(body.get("timestamp"), "timestamp"),
        proposer=_hex32(body.get("proposer"), "proposer"),
        nonce=_int(body.get("nonce"), "nonce"),
    )
    txs = body.get("transactions", [])
    if not isinstance(txs, list):
        raise WireError("transactions must be a list")
    return Block(
        header=header,
        transactions=tuple(tx_from_json(t) for t in txs),
        signature=_hex(body.get("signature"), "signature"),
    )
