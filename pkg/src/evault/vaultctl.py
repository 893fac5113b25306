"""vaultctl: operator and power-user command line client.

Signing happens locally: the private key never leaves this machine, the
server only ever sees signed transaction envelopes.  Every command has a
JSON twin via the global --json flag.  Exit codes: 0 success, 1 domain
error (the server's error envelope is printed verbatim), 2 usage error.
"""

from __future__ import annotations

import json
import os
import stat
import sys
from pathlib import Path

import click
import httpx

from evault import consensus, wire
from evault.contracts.transactions import (
    FileCase,
    GrantAccess,
    RegisterIdentity,
    RevokeAccess,
    ScheduleHearing,
    SignDocument,
    TransferCustody,
    UpdateCaseStatus,
    UploadDocument,
    make_transaction,
)
from evault.encoding import from_hex, to_hex
from evault.filestore import ObjectManifest, chunk_bytes, convergent_encrypt
from evault.hashchain import keccak256, verify_chain
from evault.identity import IdentityDetails, Role, derive_uid, generate_keypair, sign
from evault.workload import demo_schedule


class DomainError(Exception):
    def __init__(self, envelope: dict) -> None:
        super().__init__(envelope.get("message", ""))
        self.envelope = envelope


class Cli:
    def __init__(self, profile_path: str | None, server: str | None, json_mode: bool) -> None:
        self.json_mode = json_mode
        self.profile = {}
        if profile_path:
            try:
                self.profile = json.loads(Path(profile_path).read_text())
            except FileNotFoundError:
                raise click.UsageError(f"profile {profile_path} does not exist")
            except (OSError, ValueError) as exc:
                raise click.UsageError(f"profile {profile_path} is unreadable: {exc}")
        self.server = server or self.profile.get("server_url") or os.environ.get(
            "VAULTCTL_SERVER", "http://127.0.0.1:8450"
        )
        self._client: httpx.Client | None = None
        self._token: str | None = None
        self.role: str | None = None

    def client(self) -> httpx.Client:
        if self._client is None:
            self._client = httpx.Client(base_url=self.server, timeout=30.0)
        return self._client

    def emit(self, result: dict, human: list[str]) -> None:
        if self.json_mode:
            click.echo(json.dumps(result, indent=2, sort_keys=True))
        else:
            for line in human:
                click.echo(line)

    # -- key material -------------------------------------------------------

    def signing_key(self) -> bytes:
        key_path = self.profile.get("key_path")
        if not key_path:
            raise click.UsageError("profile has no key_path; run keygen and set up a profile")
        path = Path(key_path)
        if not path.exists():
            raise click.UsageError(f"key file {path} does not exist")
        mode = stat.S_IMODE(path.stat().st_mode)
        if mode & 0o077:
            raise DomainError(
                {
                    "code": "InsecureKeyFile",
                    "message": f"{path} is group/world accessible (mode {oct(mode)}); chmod 600 it",
                }
            )
        seed = path.read_bytes()
        if len(seed) != 32:
            raise DomainError({"code": "BadKeyFile", "message": f"{path} is not a 32-byte seed"})
        return seed

    def uid(self) -> bytes:
        uid_hex = self.profile.get("uid")
        if not uid_hex:
            raise click.UsageError("profile has no uid; register first")
        return from_hex(uid_hex)

    # -- HTTP ----------------------------------------------------------------

    def check(self, response: httpx.Response) -> dict:
        if response.status_code >= 400:
            try:
                envelope = response.json()
            except ValueError:
                envelope = {"code": "HTTPError", "message": response.text}
            raise DomainError(envelope)
        return response.json()

    def login(self) -> str:
        if self._token:
            return self._token
        uid = self.uid()
        key = self.signing_key()
        challenge_hex = self.check(
            self.client().post("/auth/challenge", json={"uid": to_hex(uid)})
        )["challenge"]
        signature = sign(key, from_hex(challenge_hex))
        session = self.check(
            self.client().post(
                "/auth/session", json={"uid": to_hex(uid), "signature": to_hex(signature)}
            )
        )
        self._token = session["token"]
        self.role = session.get("role")
        return self._token

    def auth_headers(self) -> dict:
        return {"Authorization": f"Bearer {self.login()}"}

    def next_nonce(self, uid: bytes) -> int:
        response = self.client().get(f"/identities/{to_hex(uid)}")
        if response.status_code == 404:
            return 1
        return self.check(response)["nonce"] + 1

    def submit(self, payload, sender_uid: bytes | None = None) -> dict:
        uid = sender_uid if sender_uid is not None else self.uid()
        key = self.signing_key()
        tx = make_transaction(
            payload,
            uid,
            self.next_nonce(uid),
            submitted_at=_now_ms(),
            signing_key=key,
        )
        receipt = self.check(self.client().post("/tx", json=wire.tx_to_json(tx)))
        return receipt


def _now_ms() -> int:
    import time

    return int(time.time() * 1000)


pass_cli = click.make_pass_decorator(Cli)


@click.group()
@click.option("--profile", envvar="VAULTCTL_PROFILE", type=click.Path(), default=None,
              help="profile JSON: server_url, key_path, uid")
@click.option("--server", default=None, help="server URL (overrides profile)")
@click.option("--json", "json_mode", is_flag=True, help="machine-readable output")
@click.pass_context
def main(ctx: click.Context, profile: str | None, server: str | None, json_mode: bool) -> None:
    """evault command line client."""
    ctx.obj = Cli(profile, server, json_mode)


def run_command(cli: Cli, fn) -> None:
    try:
        fn()
    except DomainError as err:
        click.echo(json.dumps(err.envelope), err=True)
        sys.exit(1)
    except httpx.HTTPError as err:
        click.echo(json.dumps({"code": "ConnectionError", "message": str(err)}), err=True)
        sys.exit(1)


@main.command()
@click.option("--out", required=True, type=click.Path(), help="seed file to create")
@click.option("--seed", default=None, help="32-byte hex seed (omit for random)")
@click.option("--profile-out", type=click.Path(), default=None,
              help="also write a profile JSON pointing at this key")
@click.option("--server-url", default="http://127.0.0.1:8450")
@pass_cli
def keygen(cli: Cli, out: str, seed: str | None, profile_out: str | None, server_url: str) -> None:
    """Generate a signing key (32-byte seed file, mode 0600)."""
    raw = from_hex(seed) if seed else os.urandom(32)
    _, vk = generate_keypair(raw)
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.touch(mode=0o600, exist_ok=True)
    os.chmod(path, 0o600)
    path.write_bytes(raw)
    if profile_out:
        Path(profile_out).write_text(
            json.dumps({"server_url": server_url, "key_path": str(path), "uid": None}, indent=2)
        )
    cli.emit(
        {"key_path": str(path), "verify_key": to_hex(vk)},
        [f"wrote {path} (mode 0600)", f"verify key: {to_hex(vk)}"],
    )


@main.command()
@click.option("--name", required=True)
@click.option("--national-id", required=True)
@click.option("--role", "role_name", required=True,
              type=click.Choice([r.value for r in Role]))
@click.option("--contact", default="")
@click.option("--public-key", required=True, help="new user's verify key (hex)")
@click.option("--bootstrap", is_flag=True,
              help="first registrar self-registration (signs with its own key)")
@pass_cli
def register(cli: Cli, name: str, national_id: str, role_name: str, contact: str,
             public_key: str, bootstrap: bool) -> None:
    """Register an identity (registrar only; --bootstrap for the first one)."""
    def go():
        details = IdentityDetails(name, national_id, Role(role_name), contact)
        new_uid = derive_uid(details)
        payload = RegisterIdentity(details, from_hex(public_key))
        sender = new_uid if bootstrap else cli.uid()
        receipt = cli.submit(payload, sender_uid=sender)
        cli.emit(
            {"uid": to_hex(new_uid), **receipt},
            [f"registered {name} ({role_name})",
             f"uid: {to_hex(new_uid)}",
             f"sealed in block {receipt['block_height']}"],
        )

    run_command(cli, go)


@main.command("file-case")
@click.option("--case-type", required=True)
@click.option("--petitioner", required=True, help="petitioner uid (hex)")
@click.option("--defendant", required=True, help="defendant uid (hex)")
@click.option("--lawyer", "lawyers", multiple=True, help="counsel uid (hex), repeatable")
@pass_cli
def file_case(cli: Cli, case_type: str, petitioner: str, defendant: str, lawyers: tuple[str, ...]) -> None:
    """File a case (registrar); prints the assigned case id."""
    def go():
        from evault.contracts.transactions import tx_hash

        payload = FileCase(case_type, from_hex(petitioner), from_hex(defendant),
                           tuple(from_hex(l) for l in lawyers))
        uid = cli.uid()
        key = cli.signing_key()
        tx = make_transaction(payload, uid, cli.next_nonce(uid), _now_ms(), key)
        receipt = cli.check(cli.client().post("/tx", json=wire.tx_to_json(tx)))
        case_id = to_hex(tx_hash(tx))
        cli.emit(
            {"case_id": case_id, **receipt},
            [f"case filed: {case_id}", f"sealed in block {receipt['block_height']}"],
        )

    run_command(cli, go)


@main.command()
@click.option("--case", "case_id", required=True, help="case id (hex)")
@click.option("--at", "hearing_at", required=True, type=int, help="hearing time (ms since epoch)")
@pass_cli
def schedule(cli: Cli, case_id: str, hearing_at: int) -> None:
    """Schedule the next hearing (judge)."""
    def go():
        receipt = cli.submit(ScheduleHearing(from_hex(case_id), hearing_at))
        cli.emit(receipt, [f"hearing scheduled, sealed in block {receipt['block_height']}"])

    run_command(cli, go)


@main.command()
@click.option("--case", "case_id", required=True, help="case id (hex)")
@click.option("--file", "file_path", required=True, type=click.Path(exists=True))
@click.option("--title", default=None)
@click.option("--chunk-size", default=64 * 1024, show_default=True)
@click.option("--manifest-out", type=click.Path(), default=None,
              help="where to keep the manifest incl. keys [default: FILE.manifest]")
@pass_cli
def upload(cli: Cli, case_id: str, file_path: str, title: str | None,
           chunk_size: int, manifest_out: str | None) -> None:
    """Chunk, encrypt and upload a file, then notarize it on the ledger."""
    def go():
        from evault.contracts.transactions import tx_hash

        data = Path(file_path).read_bytes()
        if not data:
            raise DomainError({"code": "EmptyObject", "message": "refusing to upload an empty file"})
        content_hash = keccak256(data)
        entries = []
        new_chunks = 0
        for chunk in chunk_bytes(data, chunk_size):
            chunk_key, ciphertext = convergent_encrypt(chunk)
            result = cli.check(cli.client().post("/files", content=ciphertext))
            new_chunks += 1 if result["new"] else 0
            entries.append((from_hex(result["cipher_hash"]), chunk_key))
        manifest = ObjectManifest(content_hash, len(data), chunk_size, tuple(entries))
        cli.check(cli.client().post("/manifests", content=manifest.encode(with_keys=True)))
        manifest_path = Path(manifest_out or file_path + ".manifest")
        manifest_path.write_text(manifest.to_text())

        payload = UploadDocument(
            from_hex(case_id),
            title or Path(file_path).name,
            content_hash,
            manifest.manifest_hash(),
            len(data),
        )
        uid = cli.uid()
        tx = make_transaction(payload, uid, cli.next_nonce(uid), _now_ms(), cli.signing_key())
        receipt = cli.check(cli.client().post("/tx", json=wire.tx_to_json(tx)))
        doc_id = to_hex(tx_hash(tx))
        dedup_note = "all chunks already stored (deduplicated)" if new_chunks == 0 else (
            f"{new_chunks} new chunk(s) stored"
        )
        cli.emit(
            {
                "doc_id": doc_id,
                "content_hash": to_hex(content_hash),
                "manifest_hash": to_hex(manifest.manifest_hash()),
                "new_chunks": new_chunks,
                "chunks": len(entries),
                "manifest_path": str(manifest_path),
                **receipt,
            },
            [
                f"doc id: {doc_id}",
                f"content hash: {to_hex(content_hash)}",
                dedup_note,
                f"manifest (keys stay client-side) written to {manifest_path}",
                f"sealed in block {receipt['block_height']}",
            ],
        )

    run_command(cli, go)


@main.command()
@click.option("--doc", "doc_id", required=True, help="document id (hex)")
@click.option("--to", "grantee", required=True, help="grantee uid (hex)")
@pass_cli
def grant(cli: Cli, doc_id: str, grantee: str) -> None:
    """Grant read access to a document."""
    def go():
        receipt = cli.submit(GrantAccess(from_hex(doc_id), from_hex(grantee)))
        cli.emit(receipt, [f"access granted, sealed in block {receipt['block_height']}"])

    run_command(cli, go)


@main.command()
@click.option("--doc", "doc_id", required=True, help="document id (hex)")
@click.option("--to", "grantee", required=True, help="uid to revoke (hex)")
@pass_cli
def revoke(cli: Cli, doc_id: str, grantee: str) -> None:
    """Revoke read access (judge)."""
    def go():
        receipt = cli.submit(RevokeAccess(from_hex(doc_id), from_hex(grantee)))
        cli.emit(receipt, [f"access revoked, sealed in block {receipt['block_height']}"])

    run_command(cli, go)


@main.command("transfer-custody")
@click.option("--doc", "doc_id", required=True, help="document id (hex)")
@click.option("--to", "to_uid", required=True, help="new custodian uid (hex)")
@click.option("--note", default="")
@pass_cli
def transfer_custody(cli: Cli, doc_id: str, to_uid: str, note: str) -> None:
    """Record a chain-of-custody transfer (current custodian only)."""
    def go():
        receipt = cli.submit(TransferCustody(from_hex(doc_id), from_hex(to_uid), note))
        cli.emit(receipt, [f"custody transferred, sealed in block {receipt['block_height']}"])

    run_command(cli, go)


@main.command("sign-doc")
@click.option("--doc", "doc_id", required=True, help="document id (hex)")
@pass_cli
def sign_doc(cli: Cli, doc_id: str) -> None:
    """Digitally sign a document's registered content."""
    def go():
        meta = cli.check(
            cli.client().get(f"/docs/{doc_id}", headers=cli.auth_headers())
        )
        content_hash = from_hex(meta["content_hash"])
        content_signature = sign(cli.signing_key(), content_hash)
        receipt = cli.submit(SignDocument(from_hex(doc_id), content_signature))
        cli.emit(
            {**receipt, "content_hash": meta["content_hash"]},
            [f"signed content {meta['content_hash']}",
             f"sealed in block {receipt['block_height']}"],
        )

    run_command(cli, go)


@main.command("update-status")
@click.option("--case", "case_id", required=True, help="case id (hex)")
@click.option("--status", "status_name", required=True,
              type=click.Choice(["Filed", "InHearing", "Decided", "Closed"]))
@click.option("--note", default="")
@pass_cli
def update_status(cli: Cli, case_id: str, status_name: str, note: str) -> None:
    """Update a case's status (judge)."""
    def go():
        from evault.contracts.transactions import CaseStatus

        receipt = cli.submit(
            UpdateCaseStatus(from_hex(case_id), CaseStatus(status_name), note)
        )
        cli.emit(receipt, [f"status -> {status_name}, sealed in block {receipt['block_height']}"])

    run_command(cli, go)


@main.command()
@click.option("--doc", "doc_id", required=True, help="document id (hex)")
@click.option("--file", "file_path", required=True, type=click.Path(exists=True))
@pass_cli
def verify(cli: Cli, doc_id: str, file_path: str) -> None:
    """Check a local file against the ledger hash: Match | Tampered | UnknownDocument."""
    def go():
        digest = keccak256(Path(file_path).read_bytes())
        result = cli.check(
            cli.client().get(f"/docs/{doc_id}/verify", params={"hash": to_hex(digest)})
        )
        outcome = result["outcome"]
        cli.emit({"outcome": outcome, "hash": to_hex(digest)}, [outcome])
        if outcome != "Match":
            sys.exit(1)

    run_command(cli, go)


@main.command()
@click.option("--doc", "doc_id", required=True, help="document id (hex)")
@pass_cli
def history(cli: Cli, doc_id: str) -> None:
    """Print a document's chain of custody."""
    def go():
        meta = cli.check(cli.client().get(f"/docs/{doc_id}", headers=cli.auth_headers()))
        events = meta["custody"]
        lines = [f"uploader: {meta['uploader_uid']}"] + [
            f"{i + 1}. {ev['from_uid'][:16]} -> {ev['to_uid'][:16]} at height {ev['at_height']}"
            + (f" ({ev['note']})" if ev["note"] else "")
            for i, ev in enumerate(events)
        ]
        cli.emit({"doc_id": doc_id, "custody": events, "uploader_uid": meta["uploader_uid"]}, lines)

    run_command(cli, go)


@main.command()
@click.option("--view", type=click.Choice(["judge", "lawyer", "citizen"]), default=None,
              help="defaults to the logged-in role")
@pass_cli
def docket(cli: Cli, view: str | None) -> None:
    """List the cases for this profile's role, hearing-sorted."""
    def go():
        headers = cli.auth_headers()
        role_view = view or {"Judge": "judge", "Lawyer": "lawyer"}.get(cli.role, "citizen")
        result = cli.check(cli.client().get("/cases", params={"role_view": role_view}, headers=headers))
        cases = result["cases"]
        lines = [
            f"#{c['case_number']} [{c['status']}] {c['case_type']}"
            + (f" next hearing {c['next_hearing_at']}" if c["next_hearing_at"] else " (no hearing)")
            for c in cases
        ] or ["no cases"]
        cli.emit({"cases": cases, "role_view": role_view}, lines)

    run_command(cli, go)


@main.command()
@click.option("--query", "-q", required=True)
@pass_cli
def search(cli: Cli, query: str) -> None:
    """Substring search over case type, number and party UIDs."""
    def go():
        result = cli.check(
            cli.client().get("/cases/search", params={"q": query}, headers=cli.auth_headers())
        )
        cases = result["cases"]
        lines = [f"#{c['case_number']} [{c['status']}] {c['case_type']}" for c in cases] or ["no matches"]
        cli.emit(result, lines)

    run_command(cli, go)


@main.command("chain-verify")
@pass_cli
def chain_verify(cli: Cli) -> None:
    """Download the chain and validate every block locally."""
    def go():
        head = cli.check(cli.client().get("/chain/head"))
        authorities = cli.check(cli.client().get("/chain/authorities"))["authorities"]
        by_id = {
            a["node_id"]: (from_hex(a["proposer_uid"]), from_hex(a["verify_key"]))
            for a in authorities
        }

        def resolver(height: int):
            return by_id[(height - 1) % len(by_id)]

        blocks = []
        for h in range(head["height"] + 1):
            body = cli.check(cli.client().get(f"/chain/blocks/{h}"))
            blocks.append(wire.block_from_json(body))
        bad = verify_chain(blocks, resolver)
        if bad is None:
            cli.emit(
                {"ok": True, "height": head["height"], "tip": head["hash"]},
                [f"OK: {head['height'] + 1} blocks, tip {head['hash']}"],
            )
        else:
            cli.emit({"ok": False, "first_invalid_height": bad},
                     [f"INVALID at height {bad}"])
            sys.exit(1)

    run_command(cli, go)


@main.command()
@click.option("--nodes", default=4, show_default=True)
@click.option("--seed", default=42, show_default=True)
@click.option("--ticks", default=200, show_default=True)
@click.option("--drop", default=0.0, show_default=True)
@click.option("--delay", default=1, show_default=True, help="mean message delay in ticks")
@click.option("--work-bits", default=0, show_default=True)
@click.option("--txs", default=50, show_default=True, help="demo workload size")
@click.option("--scenario", type=click.Path(exists=True), default=None,
              help="YAML scenario file (overrides the flags)")
@click.option("--events-out", type=click.Path(), default=None,
              help="write the event log (one record per line)")
@pass_cli
def simulate(cli: Cli, nodes: int, seed: int, ticks: int, drop: float, delay: int,
             work_bits: int, txs: int, scenario: str | None, events_out: str | None) -> None:
    """Run the multi-node consensus simulator and report per-node tips."""
    def go():
        import yaml

        sim_ticks = ticks
        workload = {"tx_count": txs, "start_tick": 1, "spacing": 2}
        config_kwargs = dict(
            node_count=nodes, rng_seed=seed, drop_probability=drop,
            mean_delay_ticks=delay, work_bits=work_bits,
        )
        if scenario:
            doc = yaml.safe_load(Path(scenario).read_text()) or {}
            for key in config_kwargs:
                if key in doc:
                    config_kwargs[key] = doc[key]
            sim_ticks = doc.get("ticks", sim_ticks)
            workload.update(doc.get("workload", {}))
        config = consensus.NetworkConfig(**config_kwargs)
        schedule_ = demo_schedule(
            config.node_count,
            tx_count=workload["tx_count"],
            start_tick=workload["start_tick"],
            spacing=workload["spacing"],
        )
        result = consensus.simulate(config, schedule_, sim_ticks)
        if events_out:
            Path(events_out).write_text(result.event_log())
        tips = [
            {"node_id": n.node_id, "height": n.height(), "tip": to_hex(n.tip_hash())}
            for n in result.nodes
        ]
        lines = [f"node {t['node_id']}: height {t['height']} tip {t['tip']}" for t in tips]
        lines.append(f"converged: {result.converged()}")
        cli.emit({"tips": tips, "converged": result.converged()}, lines)
        if not result.converged():
            sys.exit(1)

    run_command(cli, go)


if __name__ == "__main__":
    main()
