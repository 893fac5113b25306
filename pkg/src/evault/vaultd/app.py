"""HTTP/JSON API over one ledger node.

Session tokens grant read access only; every mutation must arrive as a
client-signed transaction envelope on POST /tx, so the server is never
trusted for authorship.  Read endpoints filter by the session UID's
permissions; document content never leaves the server for a UID outside
the document's ACL.
"""

from __future__ import annotations

import os
import secrets
import time
from pathlib import Path

import yaml
from fastapi import Depends, FastAPI, Header, Query, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from evault import wire
from evault.contracts.queries import (
    cases_for_citizen,
    pending_cases_for_judge,
    search_cases,
    upcoming_cases_for_lawyer,
    verify_document_hash,
)
from evault.contracts.state import TxRejected
from evault.encoding import DecodeError, from_hex, to_hex
from evault.filestore import (
    ChunkStore,
    IntegrityFailure,
    MissingChunk,
    ObjectManifest,
    get_object,
)
from evault.identity import verify as verify_signature
from evault.vaultd.node import MempoolFull, ServerNode

CHALLENGE_TTL_MS = 60_000
SESSION_TTL_MS = 30 * 60_000

_STATUS_FOR_CODE = {
    "BadRequest": 400,
    "BadSignature": 400,
    "BadNonce": 400,
    "DuplicateIdentity": 400,
    "IllegalStatusTransition": 400,
    "CustodyMismatch": 400,
    "NoJudgeRegistered": 400,
    "PermissionDenied": 403,
    "UnknownActor": 404,
    "UnknownCase": 404,
    "UnknownDocument": 404,
    "UnknownUID": 404,
    "MissingManifest": 404,
    "NotFound": 404,
    "BadChallengeSignature": 401,
    "ExpiredChallenge": 401,
    "Unauthorized": 401,
    "WrongRole": 403,
    "MempoolFull": 429,
    "MissingChunk": 500,
    "IntegrityFailure": 500,
}


class ApiError(Exception):
    def __init__(self, code: str, message: str) -> None:
        super().__init__(message)
        self.code = code
        self.message = message


def _error_response(code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=_STATUS_FOR_CODE.get(code, 400),
        content={"code": code, "message": message},
    )


class ChallengeRequest(BaseModel):
    uid: str


class SessionRequest(BaseModel):
    uid: str
    signature: str


def create_app(
    node: ServerNode,
    files_dir: Path | str,
    clock_ms=None,
) -> FastAPI:
    clock_ms = clock_ms or (lambda: int(time.time() * 1000))
    files_dir = Path(files_dir)
    chunks = ChunkStore(files_dir / "chunks")
    manifests_dir = files_dir / "manifests"
    manifests_dir.mkdir(parents=True, exist_ok=True)

    app = FastAPI(title="evault", docs_url=None, redoc_url=None)
    app.state.node = node
    app.state.chunks = chunks
    app.state.challenges: dict[str, tuple[bytes, int]] = {}
    app.state.sessions: dict[str, tuple[bytes, int]] = {}

    @app.exception_handler(ApiError)
    async def _api_error(_req, exc: ApiError):
        return _error_response(exc.code, exc.message)

    @app.exception_handler(TxRejected)
    async def _tx_rejected(_req, exc: TxRejected):
        return _error_response(exc.code, exc.message)

    @app.exception_handler(wire.WireError)
    async def _wire_error(_req, exc: wire.WireError):
        return _error_response("BadRequest", str(exc))

    def session_uid(authorization: str = Header(default="")) -> bytes:
        if not authorization.startswith("Bearer "):
            raise ApiError("Unauthorized", "missing bearer token")
        token = authorization.removeprefix("Bearer ").strip()
        entry = app.state.sessions.get(token)
        if entry is None:
            raise ApiError("Unauthorized", "unknown session token")
        uid, expires_at = entry
        if clock_ms() > expires_at:
            del app.state.sessions[token]
            raise ApiError("Unauthorized", "session expired")
        return uid

    # -- auth ---------------------------------------------------------------

    @app.post("/auth/challenge")
    def auth_challenge(body: ChallengeRequest):
        uid = _parse_uid(body.uid)
        if uid not in node.snapshot_world().identities:
            raise ApiError("UnknownUID", f"{body.uid} is not registered")
        challenge = secrets.token_bytes(32)
        app.state.challenges[to_hex(uid)] = (challenge, clock_ms() + CHALLENGE_TTL_MS)
        return {"challenge": to_hex(challenge)}

    @app.post("/auth/session")
    def auth_session(body: SessionRequest):
        uid = _parse_uid(body.uid)
        entry = app.state.challenges.get(to_hex(uid))
        if entry is None:
            raise ApiError("ExpiredChallenge", "no outstanding challenge for this uid")
        challenge, expires_at = entry
        if clock_ms() > expires_at:
            del app.state.challenges[to_hex(uid)]
            raise ApiError("ExpiredChallenge", "challenge expired, request a new one")
        identity = node.snapshot_world().identities.get(uid)
        if identity is None:
            raise ApiError("UnknownUID", f"{body.uid} is not registered")
        try:
            signature = from_hex(body.signature)
        except DecodeError as exc:
            raise ApiError("BadChallengeSignature", str(exc)) from exc
        if not verify_signature(identity.public_key, challenge, signature):
            raise ApiError("BadChallengeSignature", "challenge signature does not verify")
        del app.state.challenges[to_hex(uid)]
        token = to_hex(secrets.token_bytes(32))
        expires = clock_ms() + SESSION_TTL_MS
        app.state.sessions[token] = (uid, expires)
        return {"token": token, "expires_at": expires, "role": identity.role.value}

    # -- the single mutation path -------------------------------------------

    @app.post("/tx")
    async def submit_tx(request: Request):
        try:
            body = await request.json()
        except ValueError as exc:
            raise ApiError("BadRequest", f"body is not valid JSON: {exc}") from exc
        tx = wire.tx_from_json(body)
        try:
            receipt = node.submit(tx)
        except MempoolFull as exc:
            raise ApiError("MempoolFull", str(exc)) from exc
        return {"block_height": receipt.block_height, "tx_hash": to_hex(receipt.tx_hash)}

    # -- reads ----------------------------------------------------------------

    @app.get("/cases")
    def list_cases(role_view: str = Query(...), uid: bytes = Depends(session_uid)):
        world = node.snapshot_world()
        if role_view == "judge":
            cases = pending_cases_for_judge(world, uid)
        elif role_view == "lawyer":
            cases = upcoming_cases_for_lawyer(world, uid)
        elif role_view == "citizen":
            cases = cases_for_citizen(world, uid)
        else:
            raise ApiError("BadRequest", f"unknown role_view {role_view!r}")
        return {"cases": [wire.case_to_json(c) for c in cases]}

    @app.get("/cases/search")
    def case_search(q: str = "", uid: bytes = Depends(session_uid)):
        world = node.snapshot_world()
        return {"cases": [wire.case_to_json(c) for c in search_cases(world, q)]}

    @app.get("/cases/{case_id}")
    def case_detail(case_id: str, uid: bytes = Depends(session_uid)):
        world = node.snapshot_world()
        case = world.cases.get(_parse_hash(case_id, "case_id"))
        if case is None:
            raise ApiError("UnknownCase", f"case {case_id} not found")
        return wire.case_to_json(case)

    @app.get("/docs/{doc_id}")
    def document_detail(doc_id: str, uid: bytes = Depends(session_uid)):
        world = node.snapshot_world()
        doc = world.documents.get(_parse_hash(doc_id, "doc_id"))
        if doc is None:
            raise ApiError("UnknownDocument", f"document {doc_id} not found")
        if uid not in doc.acl:
            raise ApiError("PermissionDenied", "not in this document's access list")
        return wire.document_to_json(doc)

    @app.get("/docs/{doc_id}/content")
    def document_content(doc_id: str, uid: bytes = Depends(session_uid)):
        world = node.snapshot_world()
        doc = world.documents.get(_parse_hash(doc_id, "doc_id"))
        if doc is None:
            raise ApiError("UnknownDocument", f"document {doc_id} not found")
        if uid not in doc.acl:
            raise ApiError("PermissionDenied", "not in this document's access list")
        manifest_path = manifests_dir / to_hex(doc.manifest_hash)
        if not manifest_path.exists():
            raise ApiError("MissingManifest", "no manifest stored for this document")
        manifest = ObjectManifest.decode(manifest_path.read_bytes())
        try:
            data = get_object(chunks, manifest)
        except MissingChunk as exc:
            raise ApiError("MissingChunk", f"chunk {to_hex(exc.cipher_hash)} absent") from exc
        except IntegrityFailure as exc:
            raise ApiError("IntegrityFailure", str(exc)) from exc
        if doc.content_hash != manifest.content_hash:
            raise ApiError("IntegrityFailure", "manifest does not match the ledger record")
        return Response(content=data, media_type="application/octet-stream")

    @app.get("/docs/{doc_id}/verify")
    def document_verify(doc_id: str, hash: str = Query(...)):
        world = node.snapshot_world()
        outcome = verify_document_hash(
            world, _parse_hash(doc_id, "doc_id"), _parse_hash(hash, "hash")
        )
        return {"outcome": outcome.value}

    # -- off-chain file plane --------------------------------------------------

    @app.post("/files")
    async def put_chunk(request: Request):
        ciphertext = await request.body()
        if not ciphertext:
            raise ApiError("BadRequest", "empty chunk")
        cipher_hash, new = chunks.put(ciphertext)
        return {"cipher_hash": to_hex(cipher_hash), "new": new}

    @app.post("/manifests")
    async def put_manifest(request: Request):
        raw = await request.body()
        try:
            manifest = ObjectManifest.decode(raw)
        except DecodeError as exc:
            raise ApiError("BadRequest", f"manifest does not decode: {exc}") from exc
        manifest_hash = manifest.manifest_hash()
        path = manifests_dir / to_hex(manifest_hash)
        if not path.exists():
            path.write_bytes(raw)
        return {"manifest_hash": to_hex(manifest_hash)}

    # -- chain inspection --------------------------------------------------------

    @app.get("/chain/head")
    def chain_head():
        height, tip_hash = node.head()
        return {"height": height, "hash": to_hex(tip_hash)}

    @app.get("/chain/blocks/{height}")
    def chain_block(height: int):
        block = node.block_at(height)
        if block is None:
            raise ApiError("NotFound", f"no block at height {height}")
        return wire.block_to_json(block)

    @app.get("/chain/authorities")
    def chain_authorities():
        a = node.authority
        return {
            "authorities": [
                {
                    "node_id": a.node_id,
                    "proposer_uid": to_hex(a.proposer_uid),
                    "verify_key": to_hex(a.verify_key),
                }
            ]
        }

    @app.get("/identities/{uid}")
    def identity_detail(uid: str):
        info = wire.identity_to_json(node.snapshot_world(), _parse_uid(uid))
        if info is None:
            raise ApiError("UnknownUID", f"{uid} is not registered")
        return info

    return app


def _parse_uid(text: str) -> bytes:
    return _parse_hash(text, "uid")


def _parse_hash(text: str, field: str) -> bytes:
    try:
        raw = from_hex(text)
    except DecodeError as exc:
        raise ApiError("BadRequest", f"{field} is not valid hex") from exc
    if len(raw) != 32:
        raise ApiError("BadRequest", f"{field} must be 32 bytes of hex")
    return raw


# -- deployment entry point -----------------------------------------------------


def load_config(path: str | None = None) -> dict:
    """Listen address, data dir and sealing knobs from a YAML file and/or
    VAULTD_* environment variables (environment wins)."""
    config = {
        "host": "127.0.0.1",
        "port": 8450,
        "data_dir": "./vaultd-data",
        "seal_interval_ms": 500,
        "batch_max": 100,
        "snapshot_interval": 1000,
        "work_bits": 0,
        "node_name": "main",
    }
    if path:
        with open(path) as fh:
            config.update(yaml.safe_load(fh) or {})
    for key in list(config):
        env = os.environ.get(f"VAULTD_{key.upper()}")
        if env is not None:
            config[key] = type(config[key])(env)
    return config


def main() -> None:
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(prog="vaultd", description="evault ledger service")
    parser.add_argument("--config", help="YAML config file", default=None)
    args = parser.parse_args()
    config = load_config(args.config)
    data_dir = Path(config["data_dir"])
    node = ServerNode(
        data_dir / "ledger",
        node_name=config["node_name"],
        seal_interval_ms=config["seal_interval_ms"],
        batch_max=config["batch_max"],
        snapshot_interval=config["snapshot_interval"],
        work_bits=config["work_bits"],
    )
    app = create_app(node, data_dir / "files")
    try:
        uvicorn.run(app, host=config["host"], port=config["port"])
    finally:
        node.close()


if __name__ == "__main__":
    main()
