/**
 * Suggestions sidebar: story/scene tabs, category filter chips, and the
 * "address" flow that links a suggestion to its visuals and opens the
 * inline refinement menu with three options.
 */

import { ApiClient } from "./api";
import { ProjectStore } from "./store";
import { SUGGESTION_CATEGORIES, Suggestion, SuggestionLevel } from "./types";

export class SuggestionsSidebar {
  tab: SuggestionLevel = "story";
  categoryFilter: string | null = null;
  readonly categories = [...SUGGESTION_CATEGORIES];

  constructor(
    private api: ApiClient,
    private store: ProjectStore,
  ) {}

  visible(): Suggestion[] {
    let items = this.store.suggestions(this.tab).filter((s) => s.status !== "disliked");
    if (this.categoryFilter) items = items.filter((s) => s.category === this.categoryFilter);
    return items;
  }

  async generate(sceneId?: string): Promise<Suggestion[]> {
    const op = this.tab === "story" ? "suggest-story" : "suggest-scene";
    const params: Record<string, unknown> = {};
    if (this.categoryFilter) params.category = this.categoryFilter;
    if (this.tab === "scene") params.scene_id = sceneId;
    const envelope = await this.api.runOp(op, params);
    if (envelope.status === "failed") throw new Error(envelope.error?.message ?? "suggestions failed");
    await this.store.refresh();
    return this.visible();
  }

  /**
   * "Address": highlight the suggestion's relevant shots in the canvas and
   * open the inline refinement menu with three rewrites of the scene
   * script guided by the chosen tip.
   */
  async address(suggestion: Suggestion, tipIndex = 0): Promise<string[]> {
    this.store.setHighlights(suggestion.relevant_shot_ids);
    const project = this.store.view();
    const scene = suggestion.scene_id ? project.scenes[suggestion.scene_id] : null;
    const original = scene?.script?.trim() ? scene.script : suggestion.text;
    const envelope = await this.api.runOp("refine", {
      original,
      user_prompt: suggestion.tips[tipIndex] ?? suggestion.text,
    });
    if (envelope.status === "failed") throw new Error(envelope.error?.message ?? "refine failed");
    const options = envelope.result_ref as string[];
    this.store.refinementOptions = options;
    return options;
  }

  async dislike(suggestion: Suggestion): Promise<void> {
    await this.store.dislike(suggestion.suggestion_id);
  }
}
