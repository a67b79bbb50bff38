// Shapes of the service API documents. Everything numeric that matters
// (costs, scores) stays a string: the UI displays, it never recomputes.

export interface SpecHandle {
  spec_id: string;
  digest: string;
  assets: string[];
  objectives: string[];
  controls: number;
  mandatory: number;
  uncertain_cells: number;
  case_count: number;
}

export interface TargetJson {
  asset: string;
  objective: string;
}

export interface ProfileJson {
  tiers: TargetJson[][];
}

export interface JobProgress {
  completed: number;
  total: number;
}

export type JobState = "queued" | "running" | "done" | "failed";

export interface JobRecord {
  job_id: string;
  spec_id: string;
  budget: string;
  profile: ProfileJson;
  state: JobState;
  progress: JobProgress;
  error: string | null;
  result: ReportJson | null;
}

export interface AssignmentJson {
  control: string;
  asset: string;
  objective: string;
  rating: string;
}

export interface TierScoreJson {
  exact: string;
  approx: string;
}

export interface ReportGroupJson {
  cases: number[];
  assignments: AssignmentJson[];
  combos: string[][];
  cost: string | null;
  tier_scores: TierScoreJson[] | null;
}

export interface ReportJson {
  metadata: {
    budget: string;
    profile: ProfileJson;
    catalogue_digest: string;
    case_count: number;
    generated_at: string | null;
  };
  groups: ReportGroupJson[];
}

export interface ApiErrorDetail {
  error: string;
  row?: number | null;
  column?: string | null;
}
