// Citizen view: own cases, a live search box over the server's search
// endpoint (results rendered unmodified), and one-click remote signing of
// documents the citizen may read.  Access denials render as a denied view,
// never as silently missing data.

import { CaseSummary, DocumentMeta, ErrorEnvelope, Receipt } from "../api.js";
import { fromHex, toHex } from "../keccak.js";
import { ViewSession, submitSigned } from "../session.js";
import { DocketView } from "./judge.js";
import { errorBanner, escapeHtml, shortId } from "./html.js";

export async function loadCitizenCases(session: ViewSession): Promise<DocketView> {
  const result = await session.api.cases("citizen");
  if (!result.ok) return { cases: [], error: result.error };
  return { cases: result.value.cases, error: null };
}

export interface SearchView {
  query: string;
  cases: CaseSummary[];
  error: ErrorEnvelope | null;
}

export async function runSearch(session: ViewSession, query: string): Promise<SearchView> {
  const result = await session.api.search(query);
  if (!result.ok) return { query, cases: [], error: result.error };
  return { query, cases: result.value.cases, error: null };
}

export interface DocumentView {
  doc: DocumentMeta | null;
  denied: boolean;
  error: ErrorEnvelope | null;
}

export async function openDocument(session: ViewSession, docId: string): Promise<DocumentView> {
  const result = await session.api.document(docId);
  if (result.ok) return { doc: result.value, denied: false, error: null };
  return { doc: null, denied: result.error.code === "PermissionDenied", error: result.error };
}

export interface SignOutcome {
  receipt: Receipt | null;
  signedContentHash: string | null;
  error: ErrorEnvelope | null;
}

export async function signDocument(session: ViewSession, docId: string): Promise<SignOutcome> {
  const meta = await session.api.document(docId);
  if (!meta.ok) return { receipt: null, signedContentHash: null, error: meta.error };
  // attest to the registered content: sign the stored content hash
  const contentSignature = await session.signer.sign(fromHex(meta.value.content_hash));
  const result = await submitSigned(session, {
    kind: "SignDocument",
    doc_id: docId,
    content_signature: toHex(contentSignature),
  });
  if (!result.ok) return { receipt: null, signedContentHash: null, error: result.error };
  return {
    receipt: { block_height: result.value.block_height, tx_hash: result.value.tx_hash },
    signedContentHash: meta.value.content_hash,
    error: null,
  };
}

export function renderCitizenView(cases: DocketView, search: SearchView | null): string {
  const caseRows = cases.cases
    .map(
      (c) => `
    <div class="case-card" data-case="${c.case_id}">
      <strong>#${c.case_number}</strong> ${escapeHtml(c.case_type)}
      <span class="status">${escapeHtml(c.status)}</span>
      <span>${c.document_ids.length} document(s)</span>
    </div>`,
    )
    .join("");
  const searchRows = (search?.cases ?? [])
    .map((c) => `<li data-case="${c.case_id}">#${c.case_number} ${escapeHtml(c.case_type)}</li>`)
    .join("");
  return `
  ${errorBanner(cases.error)}
  <h2>My cases</h2>
  <div class="cases">${caseRows || "no cases on record"}</div>
  <h2>Search cases</h2>
  <input id="search-box" placeholder="case type, number or party id"
         value="${escapeHtml(search?.query ?? "")}" />
  ${search ? errorBanner(search.error) : ""}
  <ul id="search-results">${searchRows}</ul>`;
}

export function renderDocumentView(view: DocumentView): string {
  if (view.denied) {
    return `<div class="denied">Access denied: you are not on this document's access list.</div>`;
  }
  if (view.error) return errorBanner(view.error);
  const doc = view.doc!;
  const signatures = doc.signatures
    .map((s) => `<li>${shortId(s.signer_uid)} at height ${s.at_height}</li>`)
    .join("");
  return `
  <h3>${escapeHtml(doc.title)}</h3>
  <p>content hash <code>${doc.content_hash}</code></p>
  <section class="doc-text" data-extension-point="narration">
    <!-- plain text extension point for future narration tooling -->
  </section>
  <ul class="signatures">${signatures || "<li>no signatures yet</li>"}</ul>
  <button data-action="sign" data-doc="${doc.doc_id}">sign this document</button>`;
}

export function renderSignOutcome(outcome: SignOutcome): string {
  if (outcome.error) return errorBanner(outcome.error);
  return `<div class="signed">signature recorded in block ${outcome.receipt?.block_height}
    over content <code>${outcome.signedContentHash}</code></div>`;
}
