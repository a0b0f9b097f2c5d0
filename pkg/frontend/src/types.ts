// Payload shapes of the review service API. The UI never invents state:
// everything rendered comes from one of these.

export type ItemStatus = "pending" | "accepted" | "rejected";

export type SystemName = "agent" | "retrieve_verify" | "nli_pipeline";

export interface ItemSummary {
  item_id: string;
  claim_text: string;
  score: number;
  status: ItemStatus;
  page_title: string;
}

export interface QueueResponse {
  items: ItemSummary[];
}

export interface EvidenceItem {
  block_id: string;
  similarity: number;
  rank: number;
  rerank_rank: number | null;
  doc_title: string;
  text: string;
}

export interface AgentAction {
  kind: string;
  argument: string;
}

export interface TraceStep {
  thought: string;
  action: AgentAction;
  observation: string;
}

export interface AgentTrace {
  steps: TraceStep[];
  budget: number;
}

export interface Fact {
  fact_id: string;
  claim_text: string;
  source_block_id: string;
  source_doc_title: string;
  context_title: string;
  context_text: string;
  faithful: boolean | null;
}

export interface DetectionResult {
  fact_id: string;
  system: SystemName;
  score: number;
  evidence: EvidenceItem[];
  clarifications: string[];
  trace: AgentTrace | null;
  refute_count: number | null;
  meta: Record<string, unknown>;
}

export interface TwoSidedReport {
  pro_inconsistent: string | null;
  pro_consistent: string | null;
  trace: AgentTrace | null;
  unavailable: string[];
}

export interface ItemDetail {
  item_id: string;
  status: ItemStatus;
  page_title: string;
  page_text: string;
  highlight: [number, number] | null;
  fact: Fact;
  result: DetectionResult;
  report: TwoSidedReport;
}

export type VerdictDecision = "accept" | "reject";

export interface VerdictRequest {
  item_id: string;
  decision: VerdictDecision;
  note?: string | null;
}

export interface JobResponse {
  job_id: string;
  status: "pending" | "running" | "completed" | "failed";
  error: { code: string; stage: string | null; message: string } | null;
  item_ids: string[];
}

export interface AnalyzeRequest {
  title: string;
  text: string;
  system: SystemName;
  score_floor: number;
}
