/** Payload shapes of the review API. Dates are ISO-8601 strings throughout. */

export type SignalKind = 'topics' | 'entities' | 'plot' | 'llm';

export const SIGNAL_KINDS: SignalKind[] = ['topics', 'entities', 'plot', 'llm'];

export const SIGNAL_COLORS: Record<SignalKind, string> = {
  topics: '#2563eb',
  entities: '#16a34a',
  plot: '#dc2626',
  llm: '#7c3aed',
};

export type CandidateStatus = 'pending' | 'validated' | 'rejected';

export interface CandidateRow {
  id: string;
  label: string;
  start: string;
  end: string;
  status: CandidateStatus;
  iteration: number;
  campaign_id: string;
  expert_note: string | null;
  decided_at: string | null;
}

export interface QueuePayload {
  campaign_id: string;
  status: string;
  candidates: CandidateRow[];
  total: number;
}

export interface SeriesSlice {
  observed: (number | null)[];
  yhat: (number | null)[];
  lower: (number | null)[];
  upper: (number | null)[];
  flagged_days: string[];
}

export interface CandidateSummary {
  id: string;
  start: string;
  end: string;
  duration_days: number;
  votes: Record<SignalKind, number>;
  votes_by_day: Record<string, SignalKind[]>;
  peak_deficit: number | null;
  status?: CandidateStatus;
  label?: string;
  note?: string | null;
}

export interface CandidateDetail {
  candidate: CandidateSummary;
  context: { from: string; to: string };
  dates: string[];
  series: Record<SignalKind, SeriesSlice>;
}

export interface ArticleMeta {
  doc_id: string;
  date: string;
  outlet: string;
  headline: string;
  snippet: string;
}

export interface CampaignSummary {
  campaign_id: string;
  mode: string;
  corpus_span: [string, string];
  target_span: [string, string];
  iteration: number;
  iteration_open: boolean;
  converged: boolean;
  n_pending: number;
  n_finalized: number;
  reports: IterationReportRow[];
}

export interface IterationReportRow {
  iteration: number;
  n_candidates: number;
  n_validated: number;
  n_rejected: number;
  n_pending: number;
  n_new: number;
}

export interface RunStatusPayload {
  run_id: string;
  campaign_id: string;
  status: 'running' | 'done' | 'failed';
  trials_done: number;
  n_trials: number;
  best: { precision: number; recall: number } | null;
  iteration: number | null;
  n_queued: number | null;
  n_known: number | null;
  error: string | null;
}

export interface StormsPayload {
  storms: CandidateRow[];
  total: number;
}

export interface DecisionRequest {
  verdict: 'validated' | 'rejected';
  label?: string;
  note?: string;
  expert?: string;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  detail?: unknown;
}
