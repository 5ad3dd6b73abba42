/** Payload shapes of the curation service REST API. */

export type CandidateStatus = "pending" | "accepted" | "declined";

export interface CandidateView {
  triple_id: string;
  subject: string;
  relation: string;
  object: string;
  votes: number;
  level: number | null;
  source_section: string;
  context_snippet: string;
  status: CandidateStatus;
  accepts: string[];
  declines: string[];
  conflict: boolean;
}

export interface CandidateListResponse {
  candidates: CandidateView[];
  total: number;
  resolved: number;
  pending: number;
  required_verdicts: number;
}

export interface MetricCell {
  tp: number;
  fn: number;
  fp: number;
  precision: number | null;
  recall: number | null;
}

export interface ReportResponse {
  levels: Record<string, MetricCell>;
  overall: MetricCell;
  concepts: MetricCell;
  pending: string[];
  pending_count: number;
  gold_relations: number;
  expert_added: string[];
  unclassified?: MetricCell;
}

export interface CandidateFilters {
  status?: CandidateStatus | "";
  level?: number | "";
  section?: string;
}

export type Decision = "accept" | "decline";
