/** Wire types mirroring the HTTP API's JSON documents. */

export type LayerName =
  | "network"
  | "consensus"
  | "data-model"
  | "execution"
  | "application"
  | "external";

export type MotivationCategory = "monetary" | "damage" | "knowledge" | "trust";

export type OriginName = "common" | "dlt-specific";

export type StepName =
  | "spec"
  | "motivations"
  | "domains"
  | "identify"
  | "analyze"
  | "rank"
  | "countermeasures"
  | "recommend"
  | "done";

export type RiskStatusName = "candidate" | "confirmed" | "rejected";

export interface CountermeasurePayload {
  text: string;
  references: string[];
}

export interface AttackRecordPayload {
  id: string;
  name: string;
  synonyms: string[];
  description: string;
  harmed_assets: string[];
  impacted_layers: LayerName[];
  motivation_categories: MotivationCategory[];
  relates_to: string[];
  contributes_to: string[];
  origin: OriginName;
  countermeasures: CountermeasurePayload[];
  references: string[];
}

export interface KbStatsPayload {
  total: number;
  by_layer: Record<LayerName, number>;
  by_motivation: Record<MotivationCategory, number>;
  origin_counts: Record<OriginName, number>;
  origin_shares: Record<OriginName, number> | null;
}

export interface ProjectSpecPayload {
  organization: string;
  goal: string;
  technologies: string[];
  stage: string;
  scope_statement: string;
  protected_assets: string[];
  intake_answers: [string, string][];
}

export interface MotivationPayload {
  id: string;
  description: string;
  category: MotivationCategory;
}

export interface AnnotationPayload {
  motivation_id: string;
  layers: LayerName[];
  assets: string[];
}

export interface CandidateRiskPayload {
  attack_id: string;
  name: string;
  matched_motivations: string[];
  harmed_assets: string[];
  impacted_layers: LayerName[];
  scenario: string | null;
  status: RiskStatusName;
  rank: number | null;
  countermeasures: CountermeasurePayload[];
}

export interface RecommendationPayload {
  top_assets: string[];
  asset_counts: Record<string, number>;
  layer_counts: Record<LayerName, number>;
  advice: { attack_id: string; countermeasures: string[] }[];
}

export interface SessionBody {
  id: string;
  kb_version_note: string;
  current_step: StepName;
  project: ProjectSpecPayload;
  motivations: MotivationPayload[];
  annotations: AnnotationPayload[];
  risks: CandidateRiskPayload[];
  recommendation: RecommendationPayload | null;
}

export interface AuditEntryPayload {
  seq: number;
  timestamp: string;
  step: string;
  action: string;
  summary: string;
  payload: Record<string, unknown>;
}

export interface SessionDoc {
  schema_version: number;
  session: SessionBody;
  audit_log: AuditEntryPayload[];
}

export type RankDecisionPayload =
  | { attack_id: string; decision: "confirmed"; rank: number }
  | { attack_id: string; decision: "rejected" };

export interface ErrorBody {
  error: string;
  detail: string;
  violations?: { slug?: string; field: string; rule: string; message: string }[];
}
