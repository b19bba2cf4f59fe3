// Payload shapes served by the review service. The UI renders exactly what
// the service provides and never re-derives detection results client-side.

export type CandidateStatus = "pending" | "confirmed" | "rejected";

export interface CandidateSummary {
  candidate_id: string;
  segment_id: string;
  backend_id: string;
  run_pair: [string, string];
  signals: string[];
  status: CandidateStatus;
}

export interface StatusCounts {
  pending: number;
  confirmed: number;
  rejected: number;
}

export interface QueuePage {
  candidates: CandidateSummary[];
  counts: StatusCounts;
}

export interface TokenInfo {
  surface: string;
  start: number; // char offset into the run text
  end: number; // exclusive
}

export interface FlaggedSpan {
  start: number; // token index
  length: number; // token count
  text: string;
}

export interface RunView {
  run_tag: string;
  text: string;
  tokens: TokenInfo[];
  flagged_spans: FlaggedSpan[];
}

export interface Suggestion {
  category: string;
  score: number;
}

export interface CandidateDetail extends CandidateSummary {
  ground_truth: { text: string; tokens: TokenInfo[] };
  runs: RunView[];
  suggestions: Suggestion[];
  audio_url: string;
}

export interface CategoryInfo {
  category: string;
  broad_group: string;
}

export interface LabelForm {
  reviewer_id: string;
  confirmed: boolean;
  categories: string[];
  note: string;
}

export interface LabelResponse {
  candidate_id: string;
  status: CandidateStatus;
}

export interface Report {
  sections: Record<string, unknown>;
}
