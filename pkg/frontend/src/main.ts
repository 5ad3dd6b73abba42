/** Review UI: a candidate table with accept/decline actions, a live
 * progress indicator, and a report view. All numbers come verbatim from
 * the service; after every action the affected row is reconciled with the
 * server's response and the progress counters are re-fetched. */
import { ApiError, CurationApi } from "./api.js";
import { ensureReviewer } from "./session.js";
import {
  formatMetric,
  formatProgress,
  predictRecord,
  reconcileRow,
  rollbackRow,
} from "./state.js";
import type {
  CandidateFilters,
  CandidateView,
  Decision,
  ReportResponse,
} from "./types.js";

const api = new CurationApi("");

let rows: CandidateView[] = [];
let requiredVerdicts = 1;
let filters: CandidateFilters = {};
let reviewer: string | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setBanner(message: string | null): void {
  const banner = el<HTMLDivElement>("banner");
  banner.textContent = message ?? "";
  banner.hidden = message === null;
  document
    .querySelectorAll<HTMLButtonElement>("button[data-decision]")
    .forEach((button) => (button.disabled = message !== null));
}

function setNotice(message: string | null): void {
  const notice = el<HTMLDivElement>("notice");
  notice.textContent = message ?? "";
  notice.hidden = message === null;
}

function statusBadge(record: CandidateView): string {
  const conflict = record.conflict ? " conflict" : "";
  return `<span class="badge ${record.status}${conflict}">${record.status}${
    record.conflict ? " (conflict)" : ""
  }</span>`;
}

function renderRows(): void {
  const body = el<HTMLTableSectionElement>("candidate-rows");
  body.innerHTML = "";
  for (const record of rows) {
    const tr = document.createElement("tr");
    tr.dataset.tripleId = record.triple_id;

    const triple = document.createElement("td");
    triple.innerHTML = `<strong>${record.subject}</strong> <em>${record.relation}</em> ${record.object}`;
    if (record.context_snippet) {
      const snippet = document.createElement("div");
      snippet.className = "snippet";
      snippet.textContent = record.context_snippet;
      triple.appendChild(snippet);
    }

    const level = document.createElement("td");
    level.textContent = record.level === null ? "?" : String(record.level);
    const votes = document.createElement("td");
    votes.textContent = String(record.votes);
    const section = document.createElement("td");
    section.textContent = record.source_section || "–";
    const status = document.createElement("td");
    status.innerHTML = statusBadge(record);

    const actions = document.createElement("td");
    for (const decision of ["accept", "decline"] as Decision[]) {
      const button = document.createElement("button");
      button.textContent = decision;
      button.dataset.decision = decision;
      button.className = decision;
      button.addEventListener("click", () => onVerdict(record.triple_id, decision));
      actions.appendChild(button);
    }

    tr.append(triple, level, votes, section, status, actions);
    body.appendChild(tr);
  }
}

async function refreshCandidates(): Promise<void> {
  const response = await api.listCandidates(filters);
  rows = response.candidates;
  requiredVerdicts = response.required_verdicts;
  el<HTMLSpanElement>("progress").textContent = formatProgress(
    response.resolved,
    response.total,
  );
  renderRows();
}

async function onVerdict(tripleId: string, decision: Decision): Promise<void> {
  setNotice(null);
  if (!reviewer) {
    reviewer = ensureReviewer();
    if (!reviewer) {
      setNotice("A reviewer name is required before ruling on candidates.");
      return;
    }
    el<HTMLSpanElement>("reviewer").textContent = reviewer;
  }
  const snapshot = rows.find((r) => r.triple_id === tripleId);
  if (!snapshot) return;

  rows = reconcileRow(rows, predictRecord(snapshot, decision, reviewer, requiredVerdicts));
  renderRows();
  try {
    const serverRecord = await api.submitVerdict(tripleId, decision, reviewer);
    rows = reconcileRow(rows, serverRecord);
  } catch (error) {
    rows = rollbackRow(rows, snapshot);
    if (error instanceof ApiError && error.status === 409) {
      setNotice(`Not recorded: ${error.detail}`);
    } else if (error instanceof ApiError) {
      setNotice(`Verdict failed (${error.status}): ${error.detail}`);
    } else {
      setBanner("Service unreachable; actions disabled until it returns.");
    }
  }
  renderRows();
  // counts and any cross-row effects come from the server, not the client
  await refreshCandidates().catch(() => setBanner("Service unreachable."));
  await refreshReport().catch(() => undefined);
}

function metricRow(name: string, cell: { tp: number; fn: number; fp: number; precision: number | null; recall: number | null }): string {
  return `<tr><td>${name}</td><td>${cell.tp}</td><td>${cell.fn}</td><td>${cell.fp}</td>` +
    `<td>${formatMetric(cell.precision)}</td><td>${formatMetric(cell.recall)}</td></tr>`;
}

function renderReport(report: ReportResponse): void {
  const warning = el<HTMLDivElement>("report-warning");
  if (report.pending_count > 0) {
    warning.hidden = false;
    warning.textContent =
      `${report.pending_count} candidates are still unresolved; ` +
      "the figures below cover resolved items only.";
  } else {
    warning.hidden = true;
  }
  el<HTMLSpanElement>("gold-size").textContent = String(report.gold_relations);
  const table = el<HTMLTableSectionElement>("report-rows");
  const parts: string[] = [];
  for (const [level, cell] of Object.entries(report.levels)) {
    parts.push(metricRow(`level ${level}`, cell));
  }
  if (report.unclassified) parts.push(metricRow("unclassified", report.unclassified));
  parts.push(metricRow("overall", report.overall));
  parts.push(metricRow("concepts", report.concepts));
  table.innerHTML = parts.join("");
}

async function refreshReport(): Promise<void> {
  renderReport(await api.report());
}

function bindFilters(): void {
  const status = el<HTMLSelectElement>("filter-status");
  const level = el<HTMLSelectElement>("filter-level");
  const section = el<HTMLInputElement>("filter-section");
  const apply = async () => {
    filters = {
      status: (status.value || "") as CandidateFilters["status"],
      level: level.value ? Number(level.value) : "",
      section: section.value.trim() || undefined,
    };
    await refreshCandidates().catch(() => setBanner("Service unreachable."));
  };
  status.addEventListener("change", apply);
  level.addEventListener("change", apply);
  section.addEventListener("change", apply);
}

async function boot(): Promise<void> {
  el<HTMLAnchorElement>("export-link").href = api.exportUrl();
  bindFilters();
  reviewer = null;
  try {
    await api.health();
    setBanner(null);
  } catch {
    setBanner("Service unreachable; actions disabled until it returns.");
    return;
  }
  const existing = ensureReviewer();
  if (existing) {
    reviewer = existing;
    el<HTMLSpanElement>("reviewer").textContent = existing;
  }
  await refreshCandidates();
  await refreshReport();
}

boot().catch((error) => {
  setBanner(`Failed to load: ${error}`);
});
