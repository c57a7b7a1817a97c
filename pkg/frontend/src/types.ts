// Mirrors of the service's /api/v1 JSON payloads. The UI never computes
// scores; every number rendered comes from one of these shapes.

export type AnswerValue = "N" | "H";
export type CriterionCode = "AT" | "TAI" | "G";

export interface SubVectorView {
  at: AnswerValue;
  tai: AnswerValue;
  g: AnswerValue;
  score: number;
}

export interface StepView {
  step: number;
  name: string;
  status: string;
  answered: [string, string][];
  awaiting?: string | null;
  prompt?: string | null;
  skipped: boolean;
  leaf?: SubVectorView | null;
}

export interface SessionView {
  session_id: string;
  cve_id: string;
  analyst: string;
  created_at: string;
  status: "InProgress" | "Finalized";
  steps: StepView[];
}

export interface AnswerResponse {
  session_id: string;
  step: StepView;
  next_prompt?: string | null;
}

export interface CvssScoreView {
  version: string;
  vector: string;
  score: number;
  severity: string;
}

export interface CveView {
  cve_id: string;
  description: string;
  references: string[];
  cvss_vectors: [string, string][];
  cvss_scores: CvssScoreView[];
  source: string;
  fetched_at?: string | null;
}

export interface RecordView {
  cve_id: string;
  analyst: string;
  revision: number;
  overall: number | null;
  goe_string: string;
  steps: StepView[];
  cvss_scores: CvssScoreView[];
  created_at?: string | null;
  updated_at?: string | null;
}

export interface RankEntryView {
  cve_id: string;
  goe: number | null;
  cvss: number | null;
  rank: number;
}
