// Wire types for the debtviz HTTP API.  Field names mirror the JSON
// payloads exactly; the dashboard renders these values as-is and never
// derives numbers of its own.

export type SatdLabel =
  | "NON_SATD"
  | "CODE_DESIGN_DEBT"
  | "TEST_DEBT"
  | "DOCUMENTATION_DEBT"
  | "REQUIREMENT_DEBT";

export type CommentKind = "INLINE" | "MULTI_LINE" | "BLOCK" | "DOC_BLOCK";

export const ALL_LABELS: SatdLabel[] = [
  "NON_SATD",
  "CODE_DESIGN_DEBT",
  "TEST_DEBT",
  "DOCUMENTATION_DEBT",
  "REQUIREMENT_DEBT",
];

export const SATD_LABELS: SatdLabel[] = [
  "CODE_DESIGN_DEBT",
  "TEST_DEBT",
  "DOCUMENTATION_DEBT",
  "REQUIREMENT_DEBT",
];

export const COMMENT_KINDS: CommentKind[] = [
  "INLINE",
  "MULTI_LINE",
  "BLOCK",
  "DOC_BLOCK",
];

export const LABEL_COLORS: Record<SatdLabel, string> = {
  NON_SATD: "#9aa4ad",
  CODE_DESIGN_DEBT: "#d4552c",
  TEST_DEBT: "#2c7fb8",
  DOCUMENTATION_DEBT: "#7a5195",
  REQUIREMENT_DEBT: "#e2a72e",
};

export const LABEL_SHORT: Record<SatdLabel, string> = {
  NON_SATD: "not debt",
  CODE_DESIGN_DEBT: "code/design",
  TEST_DEBT: "test",
  DOCUMENTATION_DEBT: "documentation",
  REQUIREMENT_DEBT: "requirement",
};

export interface HealthInfo {
  status: string;
  model_version: string | null;
  queue_depth: number;
}

export interface RepoEntry {
  repo_id: number;
  name: string;
  path: string;
}

export interface ReposPayload {
  repos: RepoEntry[];
}

export interface RegisterResponse {
  repo_id: number;
  scan_job_id: number;
  state: string;
}

export interface ScanJobInfo {
  job_id: number;
  state: string;
  files_done: number;
  files_total: number;
  error: string | null;
}

export interface ScanStatusPayload {
  job: ScanJobInfo | null;
}

export interface CommentStats {
  by_label: Record<SatdLabel, number>;
  by_comment_kind: Record<CommentKind, number>;
}

export interface IssueStats {
  by_label: {
    SUMMARY: Record<SatdLabel, number>;
    DESCRIPTION: Record<SatdLabel, number>;
  };
  by_issue_type: Record<string, number>;
  by_open_closed: { OPEN: number; CLOSED: number };
}

export interface TimelinePoint {
  commit_id: string;
  timestamp: number;
  counts: Record<SatdLabel, number>;
  total_comments: number;
}

export interface TimelinePayload {
  points: TimelinePoint[];
}

export interface HeatmapNode {
  path: string;
  counts: Partial<Record<SatdLabel, number>>;
  total_satd: number;
  total_comments: number;
  children: HeatmapNode[];
}

export interface TreeEntry {
  name: string;
  path: string;
  is_dir: boolean;
  total_comments: number;
  satd_total: number;
}

export interface TreePayload {
  path: string;
  entries: TreeEntry[];
}

export interface CommentSpan {
  line_start: number;
  line_end: number;
  col_start: number;
  col_end: number;
}

export interface FileComment {
  comment_id: number;
  span: CommentSpan;
  kind: CommentKind;
  label: SatdLabel | null;
  probs: number[] | null;
  model_version: string | null;
}

export interface FilePayload {
  path: string;
  content: string;
  comments: FileComment[];
}

export interface KeywordSpan {
  token_start: number;
  token_end: number;
  text: string;
  score: number;
}
