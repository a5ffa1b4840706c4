/**
 * Scene timeline: draggable, resizable segments mirroring the engine's
 * timing rules (millisecond grid, contiguity, conservation under
 * narration), plus auto-align.
 */

import { ApiClient } from "./api";
import { Correspondence } from "./types";

export interface Segment {
  shotId: string;
  startS: number;
  durationS: number;
}

const ms = (s: number) => Math.round(s * 1000);
const sec = (m: number) => m / 1000;

export class SceneTimeline {
  segments: Segment[] = [];
  narrationDurationS: number | null = null;

  constructor(
    private api: ApiClient,
    public sceneId: string,
  ) {}

  load(segments: Segment[], narrationDurationS: number | null): void {
    this.segments = segments.map((s) => ({ ...s }));
    this.narrationDurationS = narrationDurationS;
  }

  totalMs(): number {
    return this.segments.reduce((n, s) => n + ms(s.durationS), 0);
  }

  /**
   * Drag a segment wider or narrower. Under narration the total is
   * conserved by shrinking the neighbors; without narration the total
   * stretches. Throws if any segment would reach zero.
   */
  resize(index: number, deltaS: number): void {
    const durations = this.segments.map((s) => ms(s.durationS));
    const delta = ms(deltaS);
    const conserve = this.narrationDurationS !== null;
    if (index < 0 || index >= durations.length) throw new Error("segment index out of range");
    if (!conserve) {
      durations[index] += delta;
    } else if (durations.length === 1) {
      throw new Error("cannot resize the only segment under narration");
    } else if (index === 0) {
      durations[0] += delta;
      durations[1] -= delta;
    } else if (index === durations.length - 1) {
      durations[index] += delta;
      durations[index - 1] -= delta;
    } else {
      const left = Math.floor(delta / 2);
      const right = delta - left;
      durations[index] += delta;
      durations[index - 1] -= left;
      durations[index + 1] -= right;
    }
    if (durations.some((d) => d <= 0)) throw new Error("a segment cannot shrink to zero");
    this.applyDurations(durations);
  }

  /** Drag the boundary between segment i and i+1. */
  moveBoundary(index: number, deltaS: number): void {
    if (index < 0 || index >= this.segments.length - 1) throw new Error("no boundary there");
    const durations = this.segments.map((s) => ms(s.durationS));
    const delta = ms(deltaS);
    durations[index] += delta;
    durations[index + 1] -= delta;
    if (durations.some((d) => d <= 0)) throw new Error("a segment cannot shrink to zero");
    this.applyDurations(durations);
  }

  private applyDurations(durations: number[]): void {
    let cursor = 0;
    this.segments = this.segments.map((segment, i) => {
      const next = { shotId: segment.shotId, startS: sec(cursor), durationS: sec(durations[i]) };
      cursor += durations[i];
      return next;
    });
  }

  /** Ask the engine to propose shot-to-script correspondences. */
  async autoAlign(): Promise<Correspondence[]> {
    const envelope = await this.api.runOp("align", { scene_id: this.sceneId });
    if (envelope.status === "failed") throw new Error(envelope.error?.message ?? "align failed");
    return envelope.result_ref as Correspondence[];
  }

  /** Fetch the compiled EDL for preview. */
  async preview(): Promise<{ total_duration_s: number; entries: unknown[] }> {
    const compiled = await this.api.compileScene(this.sceneId);
    return compiled.edl;
  }
}
