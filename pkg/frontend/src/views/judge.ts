// Judge dashboard: the hearing-sorted docket exactly as the API returns it
// (the server owns the ordering; re-sorting here would hide server bugs and
// is deliberately absent), case detail with status updates and hearing
// scheduling submitted as signed transactions.

import { ApiResult, CaseSummary, ErrorEnvelope, Receipt } from "../api.js";
import { CaseStatus } from "../codec.js";
import { ViewSession, submitSigned } from "../session.js";
import { errorBanner, escapeHtml, hearingLabel, shortId } from "./html.js";

export interface DocketView {
  cases: CaseSummary[];
  error: ErrorEnvelope | null;
}

export async function loadJudgeDocket(session: ViewSession): Promise<DocketView> {
  const result = await session.api.cases("judge");
  if (!result.ok) return { cases: [], error: result.error };
  return { cases: result.value.cases, error: null };
}

export interface ActionOutcome {
  receipt: Receipt | null;
  error: ErrorEnvelope | null;
}

function toOutcome(result: ApiResult<Receipt & { envelope: unknown }>): ActionOutcome {
  if (result.ok) return { receipt: { block_height: result.value.block_height, tx_hash: result.value.tx_hash }, error: null };
  return { receipt: null, error: result.error };
}

export async function submitStatusUpdate(
  session: ViewSession,
  caseId: string,
  status: CaseStatus,
  note: string,
): Promise<ActionOutcome> {
  return toOutcome(
    await submitSigned(session, { kind: "UpdateCaseStatus", case_id: caseId, status, note }),
  );
}

export async function submitHearingSchedule(
  session: ViewSession,
  caseId: string,
  hearingAt: number,
): Promise<ActionOutcome> {
  return toOutcome(
    await submitSigned(session, { kind: "ScheduleHearing", case_id: caseId, hearing_at: hearingAt }),
  );
}

export function renderJudgeDashboard(view: DocketView): string {
  const rows = view.cases
    .map(
      (c) => `
    <tr data-case="${c.case_id}">
      <td>#${c.case_number}</td>
      <td>${escapeHtml(c.case_type)}</td>
      <td>${escapeHtml(c.status)}</td>
      <td>${hearingLabel(c.next_hearing_at)}</td>
      <td>${c.document_ids.length} document(s)</td>
      <td>
        <button data-action="open" data-case="${c.case_id}">open</button>
      </td>
    </tr>`,
    )
    .join("");
  return `
  ${errorBanner(view.error)}
  <h2>Pending cases</h2>
  <table class="docket">
    <thead><tr><th>No.</th><th>Type</th><th>Status</th><th>Next hearing</th><th>Documents</th><th></th></tr></thead>
    <tbody>${rows || `<tr><td colspan="6">no pending cases</td></tr>`}</tbody>
  </table>`;
}

export function renderCaseActions(c: CaseSummary): string {
  return `
  <h3>Case #${c.case_number} ${escapeHtml(c.case_type)}</h3>
  <p>petitioner ${shortId(c.petitioner_uid)}, defendant ${shortId(c.defendant_uid)},
     status ${escapeHtml(c.status)}</p>
  <form data-form="status">
    <select name="status">
      <option>Filed</option><option>InHearing</option><option>Decided</option><option>Closed</option>
    </select>
    <input name="note" placeholder="note" />
    <button type="submit">update status</button>
  </form>
  <form data-form="schedule">
    <input name="hearing_at" type="datetime-local" />
    <button type="submit">schedule hearing</button>
  </form>`;
}
