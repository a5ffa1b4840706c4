/**
 * HTTP client for the storyweave service.
 *
 * The transport is injectable so tests can capture every request the UI
 * issues; the default is global fetch. All canvas state changes flow
 * through these routes and the event stream — the client never mutates
 * project records locally.
 */

import { JobEnvelope, NewSceneProposal, Project, ShotProposal } from "./types";

export interface Transport {
  (url: string, init?: RequestInit): Promise<Response>;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public details: Record<string, unknown> = {},
  ) {
    super(message);
  }

  get isStaleRevision(): boolean {
    return this.status === 409;
  }
}

export interface ProjectSnapshot {
  revision: number;
  project: Project;
}

export class ApiClient {
  constructor(
    public baseUrl: string,
    public projectId: string,
    private transport: Transport = (url, init) => fetch(url, init),
  ) {}

  private async request(method: string, path: string, body?: unknown): Promise<any> {
    const response = await this.transport(`${this.baseUrl}/projects/${this.projectId}${path}`, {
      method,
      headers: body !== undefined ? { "content-type": "application/json" } : undefined,
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    const text = await response.text();
    const data = text ? JSON.parse(text) : {};
    if (!response.ok) {
      const err = data?.error ?? {};
      throw new ApiError(response.status, err.code ?? "http_error", err.message ?? response.statusText, err);
    }
    return data;
  }

  async getProject(): Promise<ProjectSnapshot> {
    return this.request("GET", "");
  }

  async mutate(mutation: { kind: string; params: Record<string, unknown> }, revision?: number): Promise<ProjectSnapshot> {
    return this.request("POST", "/mutations", { mutation, revision });
  }

  async undo(): Promise<ProjectSnapshot> {
    return this.request("POST", "/undo", {});
  }

  /** Submit a pipeline op; resolves to the 202 envelope immediately. */
  async submitOp(op: string, params: Record<string, unknown> = {}, revision?: number): Promise<JobEnvelope> {
    return this.request("POST", `/ops/${op}`, { params, revision });
  }

  async getJob(jobId: string): Promise<JobEnvelope> {
    return this.request("GET", `/jobs/${jobId}`);
  }

  /** Submit an op and poll until its envelope is terminal. */
  async runOp(op: string, params: Record<string, unknown> = {}, revision?: number, timeoutMs = 30_000): Promise<JobEnvelope> {
    const envelope = await this.submitOp(op, params, revision);
    const deadline = Date.now() + timeoutMs;
    let current = envelope;
    while (current.status !== "done" && current.status !== "failed") {
      if (Date.now() > deadline) throw new ApiError(504, "timeout", `job ${envelope.job_id} never finished`);
      await new Promise((resolve) => setTimeout(resolve, 25));
      current = await this.getJob(envelope.job_id);
    }
    return current;
  }

  async acceptSceneProposal(proposal: NewSceneProposal, revision?: number): Promise<{ revision: number; scene: any }> {
    return this.request("POST", "/proposals/scene/accept", { proposal, revision });
  }

  async acceptShotProposal(proposal: ShotProposal, chosen: number, revision?: number): Promise<{ revision: number; shot: any }> {
    return this.request("POST", "/proposals/shot/accept", { proposal, chosen, revision });
  }

  async applyVideoVariation(result: Record<string, unknown>, chosen = 0): Promise<{ revision: number; shot: any }> {
    return this.request("POST", "/variations/video/apply", { result, chosen });
  }

  async dislikeSuggestion(suggestionId: string): Promise<{ revision: number }> {
    return this.request("POST", `/suggestions/${suggestionId}/dislike`);
  }

  /** Upload client-produced bytes (e.g. a flattened annotation raster). */
  async uploadAsset(bytes: Uint8Array, suffix = ".png"): Promise<{ revision: number; asset: any }> {
    return this.request("POST", "/assets", { data_b64: toBase64(bytes), suffix });
  }

  async compileScene(sceneId: string): Promise<{ revision: number; edl: any }> {
    return this.request("POST", "/compile", { scene_id: sceneId });
  }

  assetUrl(assetId: string): string {
    return `${this.baseUrl}/projects/${this.projectId}/assets/${assetId}`;
  }
}

export function toBase64(bytes: Uint8Array): string {
  if (typeof Buffer !== "undefined") return Buffer.from(bytes).toString("base64");
  let binary = "";
  for (const b of bytes) binary += String.fromCharCode(b);
  return btoa(binary);
}
