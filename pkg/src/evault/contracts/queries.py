"""Read-side queries over WorldState: dockets, search, document checks."""

from __future__ import annotations

import enum

from evault.contracts.state import Case, CustodyEvent, TxRejected, WorldState
from evault.contracts.transactions import CaseStatus
from evault.hashchain.keccak import Hash256, keccak256
from evault.identity import UID, Role

# Sort key for hearing-ordered dockets: scheduled cases ascending by hearing
# time, unscheduled last, ties broken by ascending case number.
def _docket_key(case: Case) -> tuple[int, int, int]:
    if case.next_hearing_at is None:
        return (1, 0, case.case_number)
    return (0, case.next_hearing_at, case.case_number)


class VerifyOutcome(enum.Enum):
    MATCH = "Match"
    TAMPERED = "Tampered"
    UNKNOWN_DOCUMENT = "UnknownDocument"


def verify_document(state: WorldState, doc_id: Hash256, file_bytes: bytes) -> VerifyOutcome:
    doc = state.documents.get(doc_id)
    if doc is None:
        return VerifyOutcome.UNKNOWN_DOCUMENT
    if keccak256(file_bytes) == doc.content_hash:
        return VerifyOutcome.MATCH
    return VerifyOutcome.TAMPERED


def verify_document_hash(state: WorldState, doc_id: Hash256, content_hash: Hash256) -> VerifyOutcome:
    """Same verdict as verify_document for a caller who hashed locally."""
    doc = state.documents.get(doc_id)
    if doc is None:
        return VerifyOutcome.UNKNOWN_DOCUMENT
    return VerifyOutcome.MATCH if content_hash == doc.content_hash else VerifyOutcome.TAMPERED


def custody_history(state: WorldState, doc_id: Hash256) -> tuple[CustodyEvent, ...]:
    doc = state.documents.get(doc_id)
    if doc is None:
        raise TxRejected("UnknownDocument", f"document {doc_id.hex()} not found")
    return doc.custody


def _require_role(state: WorldState, uid: UID, role: Role) -> None:
    identity = state.identities.get(uid)
    if identity is None:
        raise TxRejected("UnknownActor", f"{uid.hex()} is not registered")
    if identity.role is not role:
        raise TxRejected("WrongRole", f"{uid.hex()} is a {identity.role.value}, expected {role.value}")


def pending_cases_for_judge(state: WorldState, judge: UID) -> list[Case]:
    """Non-closed cases assigned to the judge, hearing-sorted."""
    _require_role(state, judge, Role.JUDGE)
    cases = [
        c
        for c in state.cases.values()
        if c.judge_uid == judge and c.status is not CaseStatus.CLOSED
    ]
    return sorted(cases, key=_docket_key)


def upcoming_cases_for_lawyer(state: WorldState, lawyer: UID) -> list[Case]:
    """Non-closed cases where the lawyer is counsel, hearing-sorted."""
    _require_role(state, lawyer, Role.LAWYER)
    cases = [
        c
        for c in state.cases.values()
        if lawyer in c.lawyer_uids and c.status is not CaseStatus.CLOSED
    ]
    return sorted(cases, key=_docket_key)


def cases_for_citizen(state: WorldState, citizen: UID) -> list[Case]:
    """All cases (any status) where the citizen is petitioner or defendant."""
    if citizen not in state.identities:
        raise TxRejected("UnknownActor", f"{citizen.hex()} is not registered")
    cases = [
        c
        for c in state.cases.values()
        if citizen in (c.petitioner_uid, c.defendant_uid)
    ]
    return sorted(cases, key=lambda c: c.case_number)


def search_cases(state: WorldState, query: str) -> list[Case]:
    """Case-insensitive substring search over case type, decimal case number
    and party UIDs (hex).  An empty query matches nothing."""
    if not query:
        return []
    needle = query.lower()
    hits = []
    for case in state.cases.values():
        haystacks = (
            case.case_type.lower(),
            str(case.case_number),
            case.petitioner_uid.hex(),
            case.defendant_uid.hex(),
        )
        if any(needle in h for h in haystacks):
            hits.append(case)
    return sorted(hits, key=lambda c: c.case_number)
