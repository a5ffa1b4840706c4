/** Wire types mirroring the backend's JSON documents. */

export type Provenance = "captured" | "generated";
export type AssetKind = "image" | "video" | "audio";
export type SuggestionLevel = "story" | "scene";

export interface AssetRef {
  asset_id: string;
  kind: AssetKind;
  uri: string;
  checksum: string;
  duration_s: number | null;
  width: number | null;
  height: number | null;
}

export interface GenerationProvenance {
  job_id: string;
  source_prompt: string;
  explanation: string;
  base_keyframe: string | null;
  neighbor_shots: [string | null, string | null] | null;
}

export interface Shot {
  shot_id: string;
  asset_id: string;
  provenance: Provenance;
  description: string;
  canvas_pos: [number, number];
  generation: GenerationProvenance | null;
  trim: [number, number] | null;
}

export interface Correspondence {
  shot_id: string;
  span: [number, number];
}

export interface Scene {
  scene_id: string;
  title: string;
  color: string;
  description: string;
  shots: string[];
  script: string;
  script_spans: unknown[];
  narration: string | null;
  music: string | null;
  correspondences: Correspondence[];
  keyframe_shot: string | null;
  generated: boolean;
}

export interface StoryVersion {
  version_id: string;
  name: string;
  scenes: string[];
  origin: "original" | "duplicate" | "prompted_variation";
  variation_prompt: string | null;
}

export interface Suggestion {
  suggestion_id: string;
  level: SuggestionLevel;
  category: string;
  text: string;
  explanation: string;
  tips: string[];
  relevant_shot_ids: string[];
  scene_id: string | null;
  status: "active" | "disliked" | "addressed";
}

export interface Project {
  schema_version: number;
  project_id: string;
  story_context: string;
  active_version: string;
  id_seq: number;
  versions: StoryVersion[];
  scenes: Record<string, Scene>;
  shots: Record<string, Shot>;
  assets: Record<string, AssetRef>;
  suggestions: Suggestion[];
  disliked_suggestions: string[];
}

export interface JobEnvelope {
  job_id: string;
  kind: string;
  status: "queued" | "running" | "done" | "failed";
  progress: number | null;
  result_ref: unknown;
  error: { code: string; message: string } | null;
}

export interface NewSceneProposal {
  title: string;
  description: string;
  insert_index: number;
  job_id: string;
}

export interface ShotProposal {
  scene_id: string;
  slot: number;
  image_prompt: string;
  candidates: string[];
  descriptions: string[];
  explanation: string;
  job_id: string;
  neighbor_shots: [string | null, string | null] | null;
  chosen: number | null;
}

export interface VideoVariationResult {
  shot_id: string;
  keyframe_asset_id: string;
  augmented_prompt: string;
  candidates: string[];
  job_id: string;
}

export interface StreamEvent {
  id: number;
  type: "mutation" | "job";
  revision: number;
  [key: string]: unknown;
}

export const SUGGESTION_CATEGORIES = [
  "structure",
  "plot",
  "imagery",
  "character",
  "dialogue",
  "pacing",
  "emotion",
  "setting",
  "theme",
  "other",
] as const;
