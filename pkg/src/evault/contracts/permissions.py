"""Role/action policy matrix.

Rows are roles, columns are actions; a cell is granted only for the stated
resource relationship:

  Registrar: RegisterIdentity, FileCase.
  Judge:     ScheduleHearing, UpdateCaseStatus on their own cases;
             GrantAccess and RevokeAccess on documents of their cases;
             reads documents of their cases (ACL floor keeps them listed).
  Lawyer:    UploadDocument, TransferCustody, SignDocument and GrantAccess
             on documents of cases where they are counsel; reads those
             documents.
  Citizen:   reads documents where they are in the ACL; SignDocument where
             they are a party (petitioner or defendant) of the document's
             case.

Reads are ACL-driven: ReadDocument is granted exactly to ACL members, and
the ACL floor (uploader, case judge, case counsel) makes the judge/lawyer
read rows above hold at all times.  No action mutates a document's content;
no such transaction kind exists.
"""

from __future__ import annotations

import enum
from typing import TYPE_CHECKING, Optional

from evault.identity import UID, Role

if TYPE_CHECKING:
    from evault.contracts.state import WorldState


class Action(enum.Enum):
    REGISTER_IDENTITY = "RegisterIdentity"
    FILE_CASE = "FileCase"
    SCHEDULE_HEARING = "ScheduleHearing"
    UPLOAD_DOCUMENT = "UploadDocument"
    GRANT_ACCESS = "GrantAccess"
    REVOKE_ACCESS = "RevokeAccess"
    TRANSFER_CUSTODY = "TransferCustody"
    SIGN_DOCUMENT = "SignDocument"
    UPDATE_CASE_STATUS = "UpdateCaseStatus"
    READ_DOCUMENT = "ReadDocument"


# Actions whose resource argument is a case id / a document id.
CASE_ACTIONS = {Action.SCHEDULE_HEARING, Action.UPDATE_CASE_STATUS, Action.UPLOAD_DOCUMENT}
DOC_ACTIONS = {
    Action.GRANT_ACCESS,
    Action.REVOKE_ACCESS,
    Action.TRANSFER_CUSTODY,
    Action.SIGN_DOCUMENT,
    Action.READ_DOCUMENT,
}


class PermissionError_(LookupError):
    """UnknownActor / UnknownResource lookups inside check_permission."""

    def __init__(self, code: str, message: str) -> None:
        super().__init__(message)
        self.code = code
        self.message = message


def check_permission(
    state: "WorldState",
    actor: UID,
    action: Action,
    resource: Optional[bytes] = None,
) -> bool:
    """Policy-matrix verdict for ``actor`` performing ``action`` on ``resource``.

    Raises PermissionError_("UnknownActor") if the actor is not registered and
    PermissionError_("UnknownResource") if the named case/document id does not
    exist.  Everything not explicitly granted is denied.
    """
    identity = state.identities.get(actor)
    if identity is None:
        raise PermissionError_("UnknownActor", f"actor {actor.hex()} is not registered")
    role = identity.role

    if action in (Action.REGISTER_IDENTITY, Action.FILE_CASE):
        return role is Role.REGISTRAR

    if action in CASE_ACTIONS:
        case = state.cases.get(resource) if resource is not None else None
        if case is None:
            raise PermissionError_("UnknownResource", "case not found")
        if action is Action.UPLOAD_DOCUMENT:
            return role is Role.LAWYER and actor in case.lawyer_uids
        # ScheduleHearing / UpdateCaseStatus
        return role is Role.JUDGE and case.judge_uid == actor

    if action in DOC_ACTIONS:
        doc = state.documents.get(resource) if resource is not None else None
        if doc is None:
            raise PermissionError_("UnknownResource", "document not found")
        case = state.cases[doc.case_id]
        if action is Action.READ_DOCUMENT:
            return actor in doc.acl
        if action is Action.GRANT_ACCESS:
            if role is Role.JUDGE:
                return case.judge_uid == actor
            if role is Role.LAWYER:
                return actor in case.lawyer_uids
            return False
        if action is Action.REVOKE_ACCESS:
            return role is Role.JUDGE and case.judge_uid == actor
        if action is Action.TRANSFER_CUSTODY:
            return role is Role.LAWYER and actor in case.lawyer_uids
        if action is Action.SIGN_DOCUMENT:
            if role is Role.LAWYER:
                return actor in case.lawyer_uids
            if role is Role.CITIZEN:
                return actor in (case.petitioner_uid, case.defendant_uid)
            return False

    return False
