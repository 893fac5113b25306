"""Transaction state machine: registration, permissions, custody chaining,
nonce replay protection, rejection purity and replay determinism."""

import random

import pytest

from evault.contracts import (
    CaseStatus,
    FileCase,
    RegisterIdentity,
    RevokeAccess,
    SignDocument,
    TransferCustody,
    TxRejected,
    UpdateCaseStatus,
    UploadDocument,
    WorldState,
    apply_transaction,
    encode_world_state,
    make_transaction,
    state_hash,
    tx_hash,
)
from evault.contracts.state import decode_world_state
from evault.contracts.transactions import decode_transaction
from evault.hashchain import keccak256
from evault.identity import Role, sign

from helpers import Scenario, make_actor


def reject_code(scenario, tx):
    with pytest.raises(TxRejected) as err:
        apply_transaction(scenario.world, tx, scenario.height + 1)
    return err.value.code


def test_bootstrap_registrar_self_signs():
    sc = Scenario()
    registrar = make_actor("First Registrar", Role.REGISTRAR)
    sc.bootstrap_registrar(registrar)
    assert registrar.uid in sc.world.identities
    assert sc.world.identities[registrar.uid].role is Role.REGISTRAR


def test_second_registrar_cannot_self_sign():
    sc = Scenario()
    registrar = make_actor("First Registrar", Role.REGISTRAR)
    sc.bootstrap_registrar(registrar)
    intruder = make_actor("Impostor Registrar", Role.REGISTRAR)
    tx = make_transaction(
        RegisterIdentity(intruder.details, intruder.verify_key),
        intruder.uid,
        1,
        0,
        intruder.signing_key,
    )
    assert reject_code(sc, tx) == "BadSignature"


def test_citizen_cannot_register_identities(courtroom):
    sc = courtroom.scenario
    newcomer = make_actor("New Person", Role.CITIZEN)
    tx = make_transaction(
        RegisterIdentity(newcomer.details, newcomer.verify_key),
        courtroom.citizen.uid,
        courtroom.citizen.nonce + 1,
        0,
        courtroom.citizen.signing_key,
    )
    assert reject_code(sc, tx) == "PermissionDenied"


def test_duplicate_identity_rejected(courtroom):
    sc = courtroom.scenario
    tx = make_transaction(
        RegisterIdentity(courtroom.citizen.details, courtroom.citizen.verify_key),
        courtroom.registrar.uid,
        courtroom.registrar.nonce + 1,
        0,
        courtroom.registrar.signing_key,
    )
    assert reject_code(sc, tx) == "DuplicateIdentity"


def test_duplicate_public_key_rejected(courtroom):
    sc = courtroom.scenario
    clone = make_actor("Different Name", Role.CITIZEN)
    tx = make_transaction(
        RegisterIdentity(clone.details, courtroom.citizen.verify_key),
        courtroom.registrar.uid,
        courtroom.registrar.nonce + 1,
        0,
        courtroom.registrar.signing_key,
    )
    assert reject_code(sc, tx) == "DuplicateIdentity"


def test_registration_advances_nonce(courtroom):
    world = courtroom.world
    assert world.nonces[courtroom.registrar.uid] == courtroom.registrar.nonce


def test_nonce_replay_rejected(courtroom):
    sc = courtroom.scenario
    replayed = sc.applied[-1]
    assert reject_code(sc, replayed) == "BadNonce"


def test_nonce_gap_rejected(courtroom):
    sc = courtroom.scenario
    newcomer = make_actor("Gap Person", Role.CITIZEN)
    tx = make_transaction(
        RegisterIdentity(newcomer.details, newcomer.verify_key),
        courtroom.registrar.uid,
        courtroom.registrar.nonce + 5,
        0,
        courtroom.registrar.signing_key,
    )
    assert reject_code(sc, tx) == "BadNonce"


def test_tampered_signature_rejected(courtroom):
    sc = courtroom.scenario
    newcomer = make_actor("Sig Person", Role.CITIZEN)
    tx = make_transaction(
        RegisterIdentity(newcomer.details, newcomer.verify_key),
        courtroom.registrar.uid,
        courtroom.registrar.nonce + 1,
        0,
        courtroom.registrar.signing_key,
    )
    from dataclasses import replace

    bad = replace(tx, signature=bytes(64))
    assert reject_code(sc, bad) == "BadSignature"


def test_judge_assignment_balances_open_cases(courtroom):
    """Two judges, two cases: each judge holds one, the first case went to
    the lower UID."""
    world = courtroom.world
    judges = {world.cases[courtroom.case_id].judge_uid, world.cases[courtroom.case2_id].judge_uid}
    assert judges == {courtroom.judge.uid, courtroom.judge2.uid}
    first_judge = world.cases[courtroom.case_id].judge_uid
    assert first_judge == min(courtroom.judge.uid, courtroom.judge2.uid)


def test_file_case_requires_registered_parties(courtroom):
    sc = courtroom.scenario
    stranger = make_actor("Stranger", Role.CITIZEN)
    tx = make_transaction(
        FileCase("theft", stranger.uid, courtroom.citizen.uid, (courtroom.lawyer.uid,)),
        courtroom.registrar.uid,
        courtroom.registrar.nonce + 1,
        0,
        courtroom.registrar.signing_key,
    )
    assert reject_code(sc, tx) == "UnknownActor"


def test_file_case_counsel_must_be_lawyers(courtroom):
    sc = courtroom.scenario
    tx = make_transaction(
        FileCase("theft", courtroom.citizen.uid, courtroom.citizen2.uid, (courtroom.judge.uid,)),
        courtroom.registrar.uid,
        courtroom.registrar.nonce + 1,
        0,
        courtroom.registrar.signing_key,
    )
    assert reject_code(sc, tx) == "PermissionDenied"


def test_no_judge_registered():
    sc = Scenario()
    registrar = make_actor("Solo Registrar", Role.REGISTRAR)
    citizen_a = make_actor("Party A", Role.CITIZEN)
    citizen_b = make_actor("Party B", Role.CITIZEN)
    sc.bootstrap_registrar(registrar)
    sc.register(registrar, citizen_a)
    sc.register(registrar, citizen_b)
    tx = make_transaction(
        FileCase("dispute", citizen_a.uid, citizen_b.uid, ()),
        registrar.uid,
        registrar.next_nonce(),
        0,
        registrar.signing_key,
    )
    with pytest.raises(TxRejected) as err:
        apply_transaction(sc.world, tx, sc.height + 1)
    assert err.value.code == "NoJudgeRegistered"


def test_case_numbers_dense_from_one(courtroom):
    numbers = sorted(c.case_number for c in courtroom.world.cases.values())
    assert numbers == [1, 2]
    assert courtroom.world.next_case_number == 3


def test_upload_builds_acl_floor(courtroom):
    sc = courtroom.scenario
    doc_id = sc.upload(courtroom.lawyer, courtroom.case_id, "evidence.pdf", b"exhibit bytes")
    doc = sc.world.documents[doc_id]
    case = sc.world.cases[courtroom.case_id]
    assert doc.acl == {courtroom.lawyer.uid, case.judge_uid} | case.lawyer_uids
    assert doc.uploader_uid == courtroom.lawyer.uid
    assert sc.world.cases[courtroom.case_id].document_ids == (doc_id,)
    assert doc.custody == ()


def test_upload_denied_for_non_counsel(courtroom):
    sc = courtroom.scenario
    tx = make_transaction(
        UploadDocument(courtroom.case_id, "x", keccak256(b"x"), keccak256(b"m"), 1),
        courtroom.lawyer2.uid,
        courtroom.lawyer2.nonce + 1,
        0,
        courtroom.lawyer2.signing_key,
    )
    assert reject_code(sc, tx) == "PermissionDenied"


def test_upload_unknown_case(courtroom):
    sc = courtroom.scenario
    tx = make_transaction(
        UploadDocument(bytes(32), "x", keccak256(b"x"), keccak256(b"m"), 1),
        courtroom.lawyer.uid,
        courtroom.lawyer.nonce + 1,
        0,
        courtroom.lawyer.signing_key,
    )
    assert reject_code(sc, tx) == "UnknownCase"


def test_grant_and_revoke_access(courtroom):
    sc = courtroom.scenario
    doc_id = sc.upload(courtroom.lawyer, courtroom.case_id, "evidence", b"payload")
    judge = courtroom.judge_of(courtroom.case_id)
    sc.grant(judge, doc_id, courtroom.citizen)
    assert courtroom.citizen.uid in sc.world.documents[doc_id].acl
    sc.revoke(judge, doc_id, courtroom.citizen)
    assert courtroom.citizen.uid not in sc.world.documents[doc_id].acl


def test_lawyer_may_grant_but_not_revoke(courtroom):
    sc = courtroom.scenario
    doc_id = sc.upload(courtroom.lawyer, courtroom.case_id, "evidence", b"payload")
    sc.grant(courtroom.lawyer, doc_id, courtroom.citizen)
    assert courtroom.citizen.uid in sc.world.documents[doc_id].acl
    tx = make_transaction(
        RevokeAccess(doc_id, courtroom.citizen.uid),
        courtroom.lawyer.uid,
        courtroom.lawyer.nonce + 1,
        0,
        courtroom.lawyer.signing_key,
    )
    assert reject_code(sc, tx) == "PermissionDenied"


def test_acl_floor_cannot_be_revoked(courtroom):
    sc = courtroom.scenario
    doc_id = sc.upload(courtroom.lawyer, courtroom.case_id, "evidence", b"payload")
    judge = courtroom.judge_of(courtroom.case_id)
    tx = make_transaction(
        RevokeAccess(doc_id, courtroom.lawyer.uid),
        judge.uid,
        judge.nonce + 1,
        0,
        judge.signing_key,
    )
    assert reject_code(sc, tx) == "PermissionDenied"


def test_custody_chain(courtroom):
    sc = courtroom.scenario
    doc_id = sc.upload(courtroom.lawyer, courtroom.case_id, "evidence", b"payload")
    judge = courtroom.judge_of(courtroom.case_id)
    sc.transfer(courtroom.lawyer, doc_id, judge, "to chambers")
    doc = sc.world.documents[doc_id]
    assert doc.current_custodian() == judge.uid
    assert doc.custody[0].from_uid == courtroom.lawyer.uid
    assert doc.custody[0].to_uid == judge.uid


def test_custody_mismatch_rejected(courtroom):
    sc = courtroom.scenario
    doc_id = sc.upload(courtroom.lawyer, courtroom.case_id, "evidence", b"payload")
    judge = courtroom.judge_of(courtroom.case_id)
    sc.transfer(courtroom.lawyer, doc_id, judge)
    # lawyer is no longer the custodian
    tx = make_transaction(
        TransferCustody(doc_id, courtroom.citizen.uid, ""),
        courtroom.lawyer.uid,
        courtroom.lawyer.nonce + 1,
        0,
        courtroom.lawyer.signing_key,
    )
    assert reject_code(sc, tx) == "CustodyMismatch"
    assert len(sc.world.documents[doc_id].custody) == 1


def test_sign_document_records_content_signature(courtroom):
    sc = courtroom.scenario
    doc_id = sc.upload(courtroom.lawyer, courtroom.case_id, "settlement", b"terms")
    sc.sign_doc(courtroom.citizen, doc_id)  # citizen is petitioner on case 1
    doc = sc.world.documents[doc_id]
    assert len(doc.signatures) == 1
    uid, content_sig, _height = doc.signatures[0]
    assert uid == courtroom.citizen.uid
    from evault.identity import verify

    assert verify(courtroom.citizen.verify_key, doc.content_hash, content_sig)


def test_sign_document_by_non_party_rejected(courtroom):
    sc = courtroom.scenario
    doc_id = sc.upload(courtroom.lawyer, courtroom.case_id, "settlement", b"terms")
    outsider = make_actor("Outsider", Role.CITIZEN)
    sc.register(courtroom.registrar, outsider)
    tx = make_transaction(
        SignDocument(doc_id, sign(outsider.signing_key, sc.world.documents[doc_id].content_hash)),
        outsider.uid,
        1,
        0,
        outsider.signing_key,
    )
    assert reject_code(sc, tx) == "PermissionDenied"


def test_sign_document_wrong_content_signature(courtroom):
    sc = courtroom.scenario
    doc_id = sc.upload(courtroom.lawyer, courtroom.case_id, "settlement", b"terms")
    tx = make_transaction(
        SignDocument(doc_id, sign(courtroom.citizen.signing_key, b"not the content hash")),
        courtroom.citizen.uid,
        courtroom.citizen.nonce + 1,
        0,
        courtroom.citizen.signing_key,
    )
    assert reject_code(sc, tx) == "BadSignature"


def test_status_walk_and_illegal_jump(courtroom):
    sc = courtroom.scenario
    judge = courtroom.judge_of(courtroom.case_id)
    sc.update_status(judge, courtroom.case_id, CaseStatus.IN_HEARING)
    sc.update_status(judge, courtroom.case_id, CaseStatus.IN_HEARING, "noted")  # self-loop
    sc.update_status(judge, courtroom.case_id, CaseStatus.DECIDED)
    tx = make_transaction(
        UpdateCaseStatus(courtroom.case_id, CaseStatus.FILED, "rewind"),
        judge.uid,
        judge.nonce + 1,
        0,
        judge.signing_key,
    )
    assert reject_code(sc, tx) == "IllegalStatusTransition"
    sc.update_status(judge, courtroom.case_id, CaseStatus.CLOSED)
    assert sc.world.cases[courtroom.case_id].status is CaseStatus.CLOSED


def test_status_skip_rejected(courtroom):
    sc = courtroom.scenario
    judge = courtroom.judge_of(courtroom.case2_id)
    tx = make_transaction(
        UpdateCaseStatus(courtroom.case2_id, CaseStatus.CLOSED, ""),
        judge.uid,
        judge.nonce + 1,
        0,
        judge.signing_key,
    )
    assert reject_code(sc, tx) == "IllegalStatusTransition"


def test_wrong_judge_cannot_touch_case(courtroom):
    sc = courtroom.scenario
    judge = courtroom.judge_of(courtroom.case_id)
    other = courtroom.judge2 if judge is courtroom.judge else courtroom.judge
    tx = make_transaction(
        UpdateCaseStatus(courtroom.case_id, CaseStatus.IN_HEARING, ""),
        other.uid,
        other.nonce + 1,
        0,
        other.signing_key,
    )
    assert reject_code(sc, tx) == "PermissionDenied"


def test_rejections_leave_state_byte_identical(courtroom):
    sc = courtroom.scenario
    doc_id = sc.upload(courtroom.lawyer, courtroom.case_id, "evidence", b"payload")
    before = encode_world_state(sc.world)
    bad_txs = [
        # replay
        sc.applied[-1],
        # custody mismatch
        make_transaction(
            TransferCustody(doc_id, courtroom.citizen.uid, ""),
            courtroom.lawyer2.uid,
            courtroom.lawyer2.nonce + 1,
            0,
            courtroom.lawyer2.signing_key,
        ),
        # permission denied
        make_transaction(
            UploadDocument(courtroom.case_id, "x", keccak256(b"x"), keccak256(b"m"), 1),
            courtroom.citizen.uid,
            courtroom.citizen.nonce + 1,
            0,
            courtroom.citizen.signing_key,
        ),
    ]
    for tx in bad_txs:
        with pytest.raises(TxRejected):
            apply_transaction(sc.world, tx, sc.height + 1)
        assert encode_world_state(sc.world) == before


def test_replay_determinism(courtroom):
    txs = courtroom.scenario.applied
    world_a = WorldState.genesis()
    world_b = WorldState.genesis()
    for height, tx in enumerate(txs, start=1):
        world_a = apply_transaction(world_a, tx, height)
    for height, tx in enumerate(txs, start=1):
        world_b = apply_transaction(world_b, tx, height)
    assert encode_world_state(world_a) == encode_world_state(world_b)
    assert state_hash(world_a) == state_hash(courtroom.world)


def test_world_state_codec_round_trip(courtroom):
    sc = courtroom.scenario
    doc_id = sc.upload(courtroom.lawyer, courtroom.case_id, "evidence", b"payload")
    judge = courtroom.judge_of(courtroom.case_id)
    sc.schedule(judge, courtroom.case_id, 1_700_000_000_000)
    sc.transfer(courtroom.lawyer, doc_id, judge)
    sc.sign_doc(courtroom.citizen, doc_id)
    encoded = encode_world_state(sc.world)
    assert encode_world_state(decode_world_state(encoded)) == encoded


def test_transaction_codec_round_trip(courtroom):
    for tx in courtroom.scenario.applied:
        decoded = decode_transaction(tx.encode())
        assert decoded == tx
        assert tx_hash(decoded) == tx_hash(tx)


def test_custody_random_walk(courtroom):
    """Random valid/invalid transfers always leave a correctly chained list
    and reject every non-custodian attempt."""
    sc = courtroom.scenario
    # a case with two counsel so custody can bounce between lawyers
    shared_case = sc.file_case(
        courtroom.registrar, "evidence shuttle", courtroom.citizen, courtroom.citizen2,
        [courtroom.lawyer, courtroom.lawyer2],
    )
    doc_id = sc.upload(courtroom.lawyer, shared_case, "chain", b"of custody")
    lawyers = {courtroom.lawyer.uid: courtroom.lawyer, courtroom.lawyer2.uid: courtroom.lawyer2}
    rng = random.Random(7)
    rejected = 0
    for _ in range(40):
        doc = sc.world.documents[doc_id]
        custodian_uid = doc.current_custodian()
        if rng.random() < 0.7 and custodian_uid in lawyers:
            holder = lawyers[custodian_uid]
            other = courtroom.lawyer2 if holder is courtroom.lawyer else courtroom.lawyer
            sc.transfer(holder, doc_id, other)
        else:
            # a counsel lawyer who is not the current custodian
            wrong = courtroom.lawyer if custodian_uid != courtroom.lawyer.uid else courtroom.lawyer2
            tx = make_transaction(
                TransferCustody(doc_id, courtroom.citizen2.uid, ""),
                wrong.uid,
                wrong.nonce + 1,
                0,
                wrong.signing_key,
            )
            assert reject_code(sc, tx) == "CustodyMismatch"
            rejected += 1
    doc = sc.world.documents[doc_id]
    previous = courtroom.lawyer.uid  # uploader
    for event in doc.custody:
        assert event.from_uid == previous
        previous = event.to_uid
    assert rejected > 0 and len(doc.custody) > 0
