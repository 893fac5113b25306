// Transaction payloads, their canonical signing bytes and the JSON envelope.
// Field order and tags mirror the ledger's canonical encoding exactly; the
// signature always covers the binary form, never the JSON.

import { ByteWriter } from "./encoding.js";
import { Signer } from "./ed25519.js";
import { fromHex, keccak256, toHex } from "./keccak.js";

export type Role = "Judge" | "Lawyer" | "Citizen" | "Registrar";
export type CaseStatus = "Filed" | "InHearing" | "Decided" | "Closed";

const ROLE_TAGS: Record<Role, number> = { Judge: 0, Lawyer: 1, Citizen: 2, Registrar: 3 };
const STATUS_TAGS: Record<CaseStatus, number> = { Filed: 0, InHearing: 1, Decided: 2, Closed: 3 };

export type Payload =
  | { kind: "RegisterIdentity"; full_name: string; national_id: string; role: Role; contact: string; public_key: string }
  | { kind: "FileCase"; case_type: string; petitioner_uid: string; defendant_uid: string; lawyer_uids: string[] }
  | { kind: "ScheduleHearing"; case_id: string; hearing_at: number }
  | { kind: "UploadDocument"; case_id: string; doc_title: string; content_hash: string; manifest_hash: string; size_bytes: number }
  | { kind: "GrantAccess"; doc_id: string; grantee_uid: string }
  | { kind: "RevokeAccess"; doc_id: string; grantee_uid: string }
  | { kind: "TransferCustody"; doc_id: string; to_uid: string; note: string }
  | { kind: "SignDocument"; doc_id: string; content_signature: string }
  | { kind: "UpdateCaseStatus"; case_id: string; status: CaseStatus; note: string };

const KIND_TAGS: Record<Payload["kind"], number> = {
  RegisterIdentity: 0,
  FileCase: 1,
  ScheduleHearing: 2,
  UploadDocument: 3,
  GrantAccess: 4,
  RevokeAccess: 5,
  TransferCustody: 6,
  SignDocument: 7,
  UpdateCaseStatus: 8,
};

export interface Envelope {
  kind: Payload["kind"];
  payload: Record<string, unknown>;
  sender_uid: string;
  nonce: number;
  submitted_at: number;
  signature: string;
}

function encodePayload(w: ByteWriter, p: Payload): void {
  switch (p.kind) {
    case "RegisterIdentity":
      w.str(p.full_name).str(p.national_id).u8(ROLE_TAGS[p.role]).str(p.contact);
      w.bytes(fromHex(p.public_key));
      break;
    case "FileCase":
      w.str(p.case_type).raw(fromHex(p.petitioner_uid)).raw(fromHex(p.defendant_uid));
      w.count(p.lawyer_uids.length);
      for (const uid of p.lawyer_uids) w.raw(fromHex(uid));
      break;
    case "ScheduleHearing":
      w.raw(fromHex(p.case_id)).u64(p.hearing_at);
      break;
    case "UploadDocument":
      w.raw(fromHex(p.case_id)).str(p.doc_title).raw(fromHex(p.content_hash));
      w.raw(fromHex(p.manifest_hash)).u64(p.size_bytes);
      break;
    case "GrantAccess":
    case "RevokeAccess":
      w.raw(fromHex(p.doc_id)).raw(fromHex(p.grantee_uid));
      break;
    case "TransferCustody":
      w.raw(fromHex(p.doc_id)).raw(fromHex(p.to_uid)).str(p.note);
      break;
    case "SignDocument":
      w.raw(fromHex(p.doc_id)).bytes(fromHex(p.content_signature));
      break;
    case "UpdateCaseStatus":
      w.raw(fromHex(p.case_id)).u8(STATUS_TAGS[p.status]).str(p.note);
      break;
  }
}

export function signingBytes(
  payload: Payload,
  senderUid: string,
  nonce: number,
  submittedAt: number,
): Uint8Array {
  const w = new ByteWriter();
  w.u8(KIND_TAGS[payload.kind]);
  encodePayload(w, payload);
  w.raw(fromHex(senderUid)).u64(nonce).u64(submittedAt);
  return w.getValue();
}

export async function makeEnvelope(
  payload: Payload,
  senderUid: string,
  nonce: number,
  submittedAt: number,
  signer: Signer,
): Promise<Envelope> {
  const bytes = signingBytes(payload, senderUid, nonce, submittedAt);
  const signature = await signer.sign(bytes);
  const { kind, ...fields } = payload;
  return {
    kind,
    payload: fields,
    sender_uid: senderUid,
    nonce,
    submitted_at: submittedAt,
    signature: toHex(signature),
  };
}

export function txHash(envelope: Envelope, payload: Payload): string {
  const w = new ByteWriter();
  w.raw(signingBytes(payload, envelope.sender_uid, envelope.nonce, envelope.submitted_at));
  w.bytes(fromHex(envelope.signature));
  return toHex(keccak256(w.getValue()));
}

export function deriveUid(fullName: string, nationalId: string, role: Role, contact: string): string {
  const w = new ByteWriter();
  w.str(fullName).str(nationalId).u8(ROLE_TAGS[role]).str(contact);
  return toHex(keccak256(w.getValue()));
}

// Off-chain manifest, canonical binary form (with keys) for POST /manifests
// plus the keys-omitted hash committed on the ledger.
export interface ManifestEntry {
  cipherHash: Uint8Array;
  key: Uint8Array;
}

export function encodeManifest(
  contentHash: Uint8Array,
  totalSize: number,
  chunkSize: number,
  entries: ManifestEntry[],
  withKeys: boolean,
): Uint8Array {
  const w = new ByteWriter();
  w.raw(contentHash).u64(totalSize).u64(chunkSize).count(entries.length);
  for (const entry of entries) {
    w.raw(entry.cipherHash);
    if (withKeys) w.raw(entry.key);
  }
  return w.getValue();
}

export function manifestHash(
  contentHash: Uint8Array,
  totalSize: number,
  chunkSize: number,
  entries: ManifestEntry[],
): string {
  return toHex(keccak256(encodeManifest(contentHash, totalSize, chunkSize, entries, false)));
}
