/**
 * Client-side project store.
 *
 * The server is the single source of truth: every committed change arrives
 * as a fresh snapshot (fetched on mutation responses or event-stream
 * nudges). Local edits are optimistic echoes layered over the snapshot and
 * rolled back when the server answers 409, surfacing a refresh prompt.
 * Pending AI proposals live here, outside the story graph, until the user
 * accepts or dismisses them.
 */

import { ApiClient, ApiError } from "./api";
import { NewSceneProposal, Project, ShotProposal, StreamEvent, Suggestion } from "./types";

export interface InlineError {
  message: string;
  code: string;
  retry?: () => Promise<void>;
}

export interface PendingScene {
  proposal: NewSceneProposal;
  status: "pending";
}

export interface PendingShot {
  proposal: ShotProposal;
  status: "pending";
}

export class ProjectStore {
  revision = 0;
  project: Project | null = null;
  pendingScenes: PendingScene[] = [];
  pendingShots: PendingShot[] = [];
  highlightedShotIds: string[] = [];
  refinementOptions: string[] = [];
  inlineError: InlineError | null = null;
  needsRefresh = false;
  private optimistic: Map<string, (project: Project) => void> = new Map();
  private listeners: Array<() => void> = [];

  constructor(public api: ApiClient) {}

  subscribe(listener: () => void): void {
    this.listeners.push(listener);
  }

  private changed(): void {
    for (const fn of this.listeners) fn();
  }

  async refresh(): Promise<void> {
    const snap = await this.api.getProject();
    this.project = snap.project;
    this.revision = snap.revision;
    this.needsRefresh = false;
    this.optimistic.clear();
    this.changed();
  }

  /** The render view: server snapshot with optimistic echoes applied. */
  view(): Project {
    if (!this.project) throw new Error("store not loaded");
    if (this.optimistic.size === 0) return this.project;
    const draft = JSON.parse(JSON.stringify(this.project)) as Project;
    for (const apply of this.optimistic.values()) apply(draft);
    return draft;
  }

  /**
   * Optimistically echo a mutation, then commit it at the current revision.
   * A stale-revision conflict rolls the echo back and raises the refresh
   * prompt; other domain errors surface inline with a retry affordance.
   */
  async mutate(
    mutation: { kind: string; params: Record<string, unknown> },
    echo?: (project: Project) => void,
  ): Promise<void> {
    const key = `${Date.now()}-${Math.random()}`;
    if (echo) {
      this.optimistic.set(key, echo);
      this.changed();
    }
    try {
      const snap = await this.api.mutate(mutation, this.revision);
      this.project = snap.project;
      this.revision = snap.revision;
      this.optimistic.delete(key);
      this.inlineError = null;
      this.changed();
    } catch (err) {
      this.optimistic.delete(key);
      if (err instanceof ApiError && err.isStaleRevision) {
        this.needsRefresh = true; // conflict: prompt the user to refresh
      } else if (err instanceof ApiError) {
        this.inlineError = {
          message: err.message,
          code: err.code,
          retry: () => this.mutate(mutation, echo),
        };
      }
      this.changed();
      throw err;
    }
  }

  handleEvent(event: StreamEvent): void {
    if (event.revision > this.revision) {
      // another client (or a job) moved the project; pull the new truth
      this.needsRefresh = true;
      this.changed();
    }
  }

  // -- pending proposals (suggestive AI output, outside the story graph)

  addPendingScene(proposal: NewSceneProposal): void {
    this.pendingScenes.push({ proposal, status: "pending" });
    this.changed();
  }

  async acceptPendingScene(index: number): Promise<string> {
    const pending = this.pendingScenes[index];
    if (!pending) throw new Error(`no pending scene at ${index}`);
    const result = await this.api.acceptSceneProposal(pending.proposal, this.revision);
    this.pendingScenes.splice(index, 1);
    await this.refresh();
    return result.scene.scene_id as string;
  }

  dismissPendingScene(index: number): void {
    this.pendingScenes.splice(index, 1);
    this.changed();
  }

  addPendingShot(proposal: ShotProposal): void {
    this.pendingShots.push({ proposal, status: "pending" });
    this.changed();
  }

  async acceptPendingShot(index: number, chosen: number): Promise<string> {
    const pending = this.pendingShots[index];
    if (!pending) throw new Error(`no pending shot at ${index}`);
    const result = await this.api.acceptShotProposal(pending.proposal, chosen, this.revision);
    this.pendingShots.splice(index, 1);
    await this.refresh();
    return result.shot.shot_id as string;
  }

  // -- suggestions

  suggestions(level?: "story" | "scene"): Suggestion[] {
    const all = this.view().suggestions;
    return level ? all.filter((s) => s.level === level) : all;
  }

  async dislike(suggestionId: string): Promise<void> {
    await this.api.dislikeSuggestion(suggestionId);
    await this.refresh();
  }

  setHighlights(shotIds: string[]): void {
    this.highlightedShotIds = [...shotIds];
    this.changed();
  }

  clearHighlights(): void {
    this.highlightedShotIds = [];
    this.refinementOptions = [];
    this.changed();
  }
}
