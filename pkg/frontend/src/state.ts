/** Pure view-state helpers: optimistic row updates reconciled against the
 * server's response, and formatting. No metric or status is ever computed
 * from row data; predictions are display-only and always replaced by the
 * server record. */
import type { CandidateView, Decision } from "./types.js";

/** Optimistic guess at the row after a verdict, shown until the server
 * responds. Mirrors the server's threshold policy for display only. */
export function predictRecord(
  record: CandidateView,
  decision: Decision,
  reviewer: string,
  requiredVerdicts: number,
): CandidateView {
  const accepts =
    decision === "accept" ? [...record.accepts, reviewer] : record.accepts;
  const declines =
    decision === "decline" ? [...record.declines, reviewer] : record.declines;
  let status = record.status;
  if (accepts.length >= requiredVerdicts) status = "accepted";
  else if (declines.length >= requiredVerdicts) status = "declined";
  return {
    ...record,
    accepts,
    declines,
    status,
    conflict: status === "pending" && accepts.length > 0 && declines.length > 0,
  };
}

/** Replace one row with the server's authoritative version. */
export function reconcileRow(
  rows: CandidateView[],
  serverRecord: CandidateView,
): CandidateView[] {
  return rows.map((row) =>
    row.triple_id === serverRecord.triple_id ? serverRecord : row,
  );
}

/** Restore a row from a snapshot after a failed mutation. */
export function rollbackRow(
  rows: CandidateView[],
  snapshot: CandidateView,
): CandidateView[] {
  return rows.map((row) =>
    row.triple_id === snapshot.triple_id ? snapshot : row,
  );
}

export function formatMetric(value: number | null): string {
  return value === null ? "—" : value.toFixed(2);
}

export function formatProgress(resolved: number, total: number): string {
  return `${resolved} / ${total} resolved`;
}

export function tripleText(record: CandidateView): string {
  return `${record.subject} ${record.relation} ${record.object}`;
}
