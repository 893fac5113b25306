"""Deterministic transaction state machine: the system's "smart contracts".

A fixed, typed transaction set is applied as a pure fold over WorldState,
enforcing role permissions, document lifecycle, custody chaining and
signature collection identically on every node.
"""

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
    decode_transaction,
    make_transaction,
    tx_hash,
)
from evault.contracts.state import (
    Case,
    CustodyEvent,
    DocumentRecord,
    TxRejected,
    WorldState,
    apply_transaction,
    encode_world_state,
    state_hash,
)
from evault.contracts.permissions import Action, check_permission, PermissionError_
from evault.contracts.queries import (
    VerifyOutcome,
    cases_for_citizen,
    custody_history,
    pending_cases_for_judge,
    search_cases,
    upcoming_cases_for_lawyer,
    verify_document,
)

__all__ = [
    "CaseStatus",
    "FileCase",
    "GrantAccess",
    "RegisterIdentity",
    "RevokeAccess",
    "ScheduleHearing",
    "SignDocument",
    "Transaction",
    "TransferCustody",
    "UpdateCaseStatus",
    "UploadDocument",
    "decode_transaction",
    "make_transaction",
    "tx_hash",
    "Case",
    "CustodyEvent",
    "DocumentRecord",
    "TxRejected",
    "WorldState",
    "apply_transaction",
    "encode_world_state",
    "state_hash",
    "Action",
    "check_permission",
    "PermissionError_",
    "VerifyOutcome",
    "cases_for_citizen",
    "custody_history",
    "pending_cases_for_judge",
    "search_cases",
    "upcoming_cases_for_lawyer",
    "verify_document",
]
