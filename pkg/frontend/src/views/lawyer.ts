// Lawyer dashboard: upcoming cases (server order) and the evidence upload
// flow.  Upload chunks and encrypts in the browser, registers the manifest,
// submits the signed notarization transaction, then asks the server to
// verify what it just stored and shows that verdict as the badge, verbatim.

import { ErrorEnvelope, Receipt } from "../api.js";
import { encodeManifest, manifestHash } from "../codec.js";
import { DEFAULT_CHUNK_SIZE, encryptFile } from "../chunking.js";
import { toHex } from "../keccak.js";
import { ViewSession, submitSigned } from "../session.js";
import { DocketView } from "./judge.js";
import { errorBanner, escapeHtml, hearingLabel } from "./html.js";

export async function loadLawyerCases(session: ViewSession): Promise<DocketView> {
  const result = await session.api.cases("lawyer");
  if (!result.ok) return { cases: [], error: result.error };
  return { cases: result.value.cases, error: null };
}

export interface UploadOutcome {
  docId: string | null;
  contentHash: string | null;
  newChunks: number;
  totalChunks: number;
  deduplicated: boolean;
  receipt: Receipt | null;
  verifyBadge: string | null; // the /verify outcome, exactly as returned
  error: ErrorEnvelope | null;
}

export async function uploadEvidence(
  session: ViewSession,
  caseId: string,
  fileName: string,
  data: Uint8Array,
  chunkSize = DEFAULT_CHUNK_SIZE,
): Promise<UploadOutcome> {
  const failed = (error: ErrorEnvelope): UploadOutcome => ({
    docId: null,
    contentHash: null,
    newChunks: 0,
    totalChunks: 0,
    deduplicated: false,
    receipt: null,
    verifyBadge: null,
    error,
  });
  if (data.length === 0) {
    return failed({ code: "EmptyObject", message: "refusing to upload an empty file" });
  }

  const { contentHash, chunks, entries } = encryptFile(data, chunkSize);
  let newChunks = 0;
  for (const chunk of chunks) {
    const stored = await session.api.putChunk(chunk.ciphertext);
    if (!stored.ok) return failed(stored.error);
    if (stored.value.new) newChunks += 1;
  }
  const manifest = encodeManifest(contentHash, data.length, chunkSize, entries, true);
  const manifestResult = await session.api.putManifest(manifest);
  if (!manifestResult.ok) return failed(manifestResult.error);

  const submitted = await submitSigned(session, {
    kind: "UploadDocument",
    case_id: caseId,
    doc_title: fileName,
    content_hash: toHex(contentHash),
    manifest_hash: manifestHash(contentHash, data.length, chunkSize, entries),
    size_bytes: data.length,
  });
  if (!submitted.ok) return failed(submitted.error);

  const { txHash } = await import("../codec.js");
  const docId = txHash(submitted.value.envelope, {
    kind: "UploadDocument",
    case_id: caseId,
    doc_title: fileName,
    content_hash: toHex(contentHash),
    manifest_hash: manifestHash(contentHash, data.length, chunkSize, entries),
    size_bytes: data.length,
  });

  const verdict = await session.api.verify(docId, toHex(contentHash));
  return {
    docId,
    contentHash: toHex(contentHash),
    newChunks,
    totalChunks: chunks.length,
    deduplicated: newChunks === 0,
    receipt: { block_height: submitted.value.block_height, tx_hash: submitted.value.tx_hash },
    verifyBadge: verdict.ok ? verdict.value.outcome : null,
    error: verdict.ok ? null : verdict.error,
  };
}

export function renderLawyerDashboard(view: DocketView): string {
  const rows = view.cases
    .map(
      (c) => `
    <tr data-case="${c.case_id}">
      <td>#${c.case_number}</td>
      <td>${escapeHtml(c.case_type)}</td>
      <td>${escapeHtml(c.status)}</td>
      <td>${hearingLabel(c.next_hearing_at)}</td>
      <td><label class="upload-drop" data-case="${c.case_id}">
        upload evidence <input type="file" data-upload="${c.case_id}" hidden />
      </label></td>
    </tr>`,
    )
    .join("");
  return `
  ${errorBanner(view.error)}
  <h2>Upcoming cases</h2>
  <table class="docket">
    <thead><tr><th>No.</th><th>Type</th><th>Status</th><th>Next hearing</th><th>Evidence</th></tr></thead>
    <tbody>${rows || `<tr><td colspan="5">no upcoming cases</td></tr>`}</tbody>
  </table>
  <div id="upload-result"></div>`;
}

export function renderUploadOutcome(outcome: UploadOutcome): string {
  if (outcome.error) return errorBanner(outcome.error);
  const dedup = outcome.deduplicated
    ? `<span class="dedup">already stored: 0 new chunks</span>`
    : `<span class="dedup">${outcome.newChunks} of ${outcome.totalChunks} chunks newly stored</span>`;
  const badge = outcome.verifyBadge
    ? `<span class="badge badge-${outcome.verifyBadge.toLowerCase()}">${escapeHtml(outcome.verifyBadge)}</span>`
    : "";
  return `
  <div class="upload-ok">
    notarized as <code>${outcome.docId}</code> in block ${outcome.receipt?.block_height}
    ${dedup} ${badge}
  </div>`;
}
