/**
 * Video generation panel: structured prompt fields with "suggest"
 * autofill, annotation-aware generation, and variant selection.
 *
 * Generation with annotations issues exactly two artifacts to the backend:
 * the flattened annotated raster (uploaded for prompt augmentation) and
 * the clean keyframe *reference* carried by the animate call. The clean
 * image itself is never re-uploaded and never altered.
 */

import { ApiClient } from "./api";
import { AnnotationOverlay } from "./annotations";
import { JobEnvelope, VideoVariationResult } from "./types";

export interface PromptFields {
  camera_movement: string;
  lighting: string;
  style: string;
  action: string;
}

export const EMPTY_FIELDS: PromptFields = {
  camera_movement: "",
  lighting: "",
  style: "",
  action: "",
};

export class VideoPanel {
  fields: PromptFields = { ...EMPTY_FIELDS };
  overlay: AnnotationOverlay;
  result: VideoVariationResult | null = null;
  selected: number | null = null;

  constructor(
    private api: ApiClient,
    public shotId: string,
    cleanAssetId: string,
    width: number,
    height: number,
  ) {
    this.overlay = new AnnotationOverlay(cleanAssetId, width, height);
  }

  /** "Suggest": autofill the four cinematic fields from the keyframe and
   * any annotations. */
  async suggestFields(): Promise<PromptFields> {
    let annotationAssetId: string | undefined;
    if (!this.overlay.isEmpty) {
      annotationAssetId = (await this.uploadOverlay()).asset_id;
    }
    const envelope = await this.api.runOp("video-prompt", {
      shot_id: this.shotId,
      annotation_asset_id: annotationAssetId,
    });
    if (envelope.status === "failed") throw new Error(envelope.error?.message ?? "suggest failed");
    this.fields = envelope.result_ref as PromptFields;
    return this.fields;
  }

  promptText(): string {
    return [this.fields.camera_movement, this.fields.lighting, this.fields.style, this.fields.action]
      .filter(Boolean)
      .join("; ");
  }

  private async uploadOverlay(): Promise<{ asset_id: string }> {
    const flattened = this.overlay.flatten();
    const uploaded = await this.api.uploadAsset(flattened.rasterPng, ".png");
    return uploaded.asset;
  }

  /**
   * Generate video variants. When the overlay has content the raster goes
   * up as its own asset and only its id rides along with the animate call;
   * the keyframe referenced for generation stays the clean one.
   */
  async generate(userPrompt?: string): Promise<VideoVariationResult> {
    let annotationAssetId: string | undefined;
    if (!this.overlay.isEmpty) {
      annotationAssetId = (await this.uploadOverlay()).asset_id;
    }
    const prompt = userPrompt ?? (this.promptText() || undefined);
    const envelope: JobEnvelope = await this.api.runOp("animate", {
      shot_id: this.shotId,
      annotation_asset_id: annotationAssetId,
      user_prompt: prompt,
    });
    if (envelope.status === "failed") {
      throw new Error(envelope.error?.message ?? "video generation failed");
    }
    this.result = envelope.result_ref as VideoVariationResult;
    return this.result;
  }

  /** Pick a variant from the gallery and apply it to the story. */
  async select(index: number): Promise<string> {
    if (!this.result) throw new Error("nothing generated yet");
    const applied = await this.api.applyVideoVariation(this.result as unknown as Record<string, unknown>, index);
    this.selected = index;
    return applied.shot.shot_id as string;
  }
}
