// Browser bootstrap: login screen, then the role-appropriate dashboard.
// All domain data renders exactly as the API returned it; this file only
// wires DOM events to the view controllers.

import { ApiClient } from "./api.js";
import { login, ViewSession, describeError } from "./session.js";
import {
  loadJudgeDocket,
  renderCaseActions,
  renderJudgeDashboard,
  submitHearingSchedule,
  submitStatusUpdate,
} from "./views/judge.js";
import { loadLawyerCases, renderLawyerDashboard, renderUploadOutcome, uploadEvidence } from "./views/lawyer.js";
import {
  loadCitizenCases,
  openDocument,
  renderCitizenView,
  renderDocumentView,
  renderSignOutcome,
  runSearch,
  signDocument,
} from "./views/citizen.js";
import { CaseStatus } from "./codec.js";

const root = document.getElementById("app")!;
let session: ViewSession | null = null;

function toast(text: string, isError = false): void {
  const el = document.createElement("div");
  el.className = isError ? "toast toast-error" : "toast";
  el.textContent = text;
  document.body.appendChild(el);
  setTimeout(() => el.remove(), 6000);
}

function renderLogin(): void {
  root.innerHTML = `
  <h1>evault</h1>
  <form id="login">
    <input name="server" placeholder="server URL" value="${location.origin}" />
    <input name="uid" placeholder="your UID (hex)" />
    <input name="seed" type="password" placeholder="key seed (hex, stays in memory)" />
    <button type="submit">log in</button>
  </form>`;
  document.getElementById("login")!.addEventListener("submit", async (event) => {
    event.preventDefault();
    const form = event.target as HTMLFormElement;
    const data = new FormData(form);
    const api = new ApiClient(String(data.get("server")));
    const result = await login(api, String(data.get("uid")).trim(), String(data.get("seed")).trim());
    if (!result.ok) {
      toast(describeError(result.error), true);
      return;
    }
    session = result.value;
    renderDashboard();
  });
}

async function renderDashboard(): Promise<void> {
  if (!session) return renderLogin();
  if (session.role === "Judge") return renderJudge();
  if (session.role === "Lawyer") return renderLawyer();
  return renderCitizen();
}

async function renderJudge(): Promise<void> {
  const view = await loadJudgeDocket(session!);
  root.innerHTML = renderJudgeDashboard(view) + `<div id="case-panel"></div>`;
  root.querySelectorAll("[data-action=open]").forEach((button) => {
    button.addEventListener("click", async () => {
      const caseId = (button as HTMLElement).dataset.case!;
      const detail = await session!.api.caseDetail(caseId);
      if (!detail.ok) return toast(describeError(detail.error), true);
      const panel = document.getElementById("case-panel")!;
      panel.innerHTML = renderCaseActions(detail.value);
      panel.querySelector("[data-form=status]")!.addEventListener("submit", async (e) => {
        e.preventDefault();
        const fd = new FormData(e.target as HTMLFormElement);
        const outcome = await submitStatusUpdate(
          session!, caseId, fd.get("status") as CaseStatus, String(fd.get("note") ?? ""),
        );
        if (outcome.error) toast(describeError(outcome.error), true);
        else {
          toast(`status updated in block ${outcome.receipt!.block_height}`);
          renderJudge();
        }
      });
      panel.querySelector("[data-form=schedule]")!.addEventListener("submit", async (e) => {
        e.preventDefault();
        const fd = new FormData(e.target as HTMLFormElement);
        const at = new Date(String(fd.get("hearing_at"))).getTime();
        const outcome = await submitHearingSchedule(session!, caseId, at);
        if (outcome.error) toast(describeError(outcome.error), true);
        else {
          toast(`hearing scheduled in block ${outcome.receipt!.block_height}`);
          renderJudge();
        }
      });
    });
  });
}

async function renderLawyer(): Promise<void> {
  const view = await loadLawyerCases(session!);
  root.innerHTML = renderLawyerDashboard(view);
  root.querySelectorAll("input[data-upload]").forEach((input) => {
    input.addEventListener("change", async () => {
      const fileInput = input as HTMLInputElement;
      const file = fileInput.files?.[0];
      if (!file) return;
      const bytes = new Uint8Array(await file.arrayBuffer());
      const outcome = await uploadEvidence(session!, fileInput.dataset.upload!, file.name, bytes);
      document.getElementById("upload-result")!.innerHTML = renderUploadOutcome(outcome);
    });
  });
}

async function renderCitizen(search: string | null = null): Promise<void> {
  const cases = await loadCitizenCases(session!);
  const searchView = search === null ? null : await runSearch(session!, search);
  root.innerHTML = renderCitizenView(cases, searchView) + `<div id="doc-panel"></div>`;
  const box = document.getElementById("search-box") as HTMLInputElement;
  box.addEventListener("change", () => renderCitizen(box.value));
  root.querySelectorAll(".case-card, #search-results li").forEach((card) => {
    card.addEventListener("click", async () => {
      const caseId = (card as HTMLElement).dataset.case!;
      const detail = await session!.api.caseDetail(caseId);
      if (!detail.ok) return toast(describeError(detail.error), true);
      const panel = document.getElementById("doc-panel")!;
      panel.innerHTML = detail.value.document_ids
        .map((d) => `<button data-doc="${d}">document ${d.slice(0, 12)}</button>`)
        .join("");
      panel.querySelectorAll("button[data-doc]").forEach((docButton) => {
        docButton.addEventListener("click", async () => {
          const docId = (docButton as HTMLElement).dataset.doc!;
          const docView = await openDocument(session!, docId);
          panel.innerHTML = renderDocumentView(docView);
          panel.querySelector("[data-action=sign]")?.addEventListener("click", async () => {
            const outcome = await signDocument(session!, docId);
            panel.innerHTML += renderSignOutcome(outcome);
          });
        });
      });
    });
  });
}

renderLogin();
