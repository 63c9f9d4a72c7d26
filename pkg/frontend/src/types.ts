export const SEVERITY_LABELS = [
  "Normal",
  "Mild",
  "Borderline",
  "Moderate",
  "Severe",
  "Extreme",
] as const;

export type SeverityLabel = (typeof SEVERITY_LABELS)[number];

export interface MachineVotes {
  keyword: string | null;
  zeroshot: string | null;
}

export interface Task {
  doc_id: string;
  text: string;
  language: string;
  status: "unlabeled" | "labeled" | "fused";
  expert_label?: string;
  machine_votes?: MachineVotes;
}

export interface Progress {
  total: number;
  labeled: number;
  fused: number;
  pending: number;
}

export interface Band {
  upper_bound: number;
  label: string;
}

/** One submission; its identity triple makes server retries idempotent. */
export interface Submission {
  doc_id: string;
  annotator_id: string;
  label: string;
  submitted_at: number;
  blind_mode: boolean;
}

export interface SessionState {
  annotatorId: string;
  blindMode: boolean;
  tasks: Task[];
  cursor: number;
  current: Task | null;
  selectedLabel: SeverityLabel | null;
  progress: Progress | null;
  pendingCount: number;
  banner: string | null;
  inlineError: string | null;
  allLabeled: boolean;
}
