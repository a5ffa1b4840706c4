/**
 * Client-side pre-validation mirroring the server's invariants, so the UI
 * never issues a mutation the service would reject with 422.
 */

import { Project } from "./types";

export interface Rejection {
  invariant: string;
  message: string;
}

function activeScenes(project: Project): string[] {
  const version = project.versions.find((v) => v.version_id === project.active_version);
  return version ? version.scenes : [];
}

export function canMoveShot(project: Project, shotId: string, toSceneId: string): Rejection | null {
  if (!project.shots[shotId]) return { invariant: "unknown-id", message: `unknown shot ${shotId}` };
  const target = project.scenes[toSceneId];
  if (!target) return { invariant: "unknown-id", message: `unknown scene ${toSceneId}` };
  if (target.shots.includes(shotId)) {
    return { invariant: "move-noop", message: "shot already in that scene" };
  }
  return null;
}

export function canReorderShots(project: Project, sceneId: string, order: string[]): Rejection | null {
  const scene = project.scenes[sceneId];
  if (!scene) return { invariant: "unknown-id", message: `unknown scene ${sceneId}` };
  const current = [...scene.shots].sort();
  const proposed = [...order].sort();
  if (current.length !== proposed.length || current.some((v, i) => v !== proposed[i])) {
    return { invariant: "reorder-permutation", message: "order must be a permutation of the scene's shots" };
  }
  return null;
}

export function canReorderScenes(project: Project, order: string[]): Rejection | null {
  const current = [...activeScenes(project)].sort();
  const proposed = [...order].sort();
  if (current.length !== proposed.length || current.some((v, i) => v !== proposed[i])) {
    return { invariant: "reorder-permutation", message: "order must be a permutation of the version's scenes" };
  }
  return null;
}

export function canTrimShot(project: Project, shotId: string, trim: [number, number]): Rejection | null {
  const shot = project.shots[shotId];
  if (!shot) return { invariant: "unknown-id", message: `unknown shot ${shotId}` };
  const asset = project.assets[shot.asset_id];
  const limit = asset?.duration_s ?? Infinity;
  const [inS, outS] = trim;
  if (!(0 <= inS && inS < outS && outS <= limit)) {
    return { invariant: "trim-bounds", message: `trim (${inS}, ${outS}) outside [0, ${limit}]` };
  }
  return null;
}

export function canInsertSceneAt(project: Project, index: number): Rejection | null {
  const count = activeScenes(project).length;
  if (index < 0 || index > count) {
    return { invariant: "insert-index", message: `index ${index} outside [0, ${count}]` };
  }
  return null;
}

export function canSetKeyframe(project: Project, sceneId: string, shotId: string): Rejection | null {
  const scene = project.scenes[sceneId];
  if (!scene) return { invariant: "unknown-id", message: `unknown scene ${sceneId}` };
  if (!scene.shots.includes(shotId)) {
    return { invariant: "keyframe-in-scene", message: "keyframe must be one of the scene's shots" };
  }
  return null;
}
