/**
 * Canvas view state: semantic zoom, node view-models, provenance styling,
 * plus-button gap actions, and compare-mode row alignment.
 *
 * Rendering is modeled as pure view-model derivation so the invariants
 * (outline color is a pure function of provenance; zooming past the
 * collapse threshold reduces scenes to keyframes and the editor to an
 * outline) are directly testable.
 */

import { Project, Provenance, Scene, Shot } from "./types";

/** Captured media renders with a purple outline, generated with orange. */
export const PROVENANCE_OUTLINE: Record<Provenance, string> = {
  captured: "#939BC0",
  generated: "#CC8D6C",
};

/** Below this zoom each scene collapses to its keyframe and the editor
 * shows a scene outline. */
export const COLLAPSE_THRESHOLD = 0.4;

export type CanvasMode = "story" | "compare";

export interface CanvasViewState {
  zoom: number;
  layout: Record<string, [number, number]>;
  selection: string[];
  mode: CanvasMode;
}

export function initialViewState(): CanvasViewState {
  return { zoom: 1.0, layout: {}, selection: [], mode: "story" };
}

export function setZoom(state: CanvasViewState, zoom: number): CanvasViewState {
  return { ...state, zoom: Math.min(4, Math.max(0.05, zoom)) };
}

export function isCollapsed(state: CanvasViewState): boolean {
  return state.zoom < COLLAPSE_THRESHOLD;
}

/** Editor density follows the canvas zoom: full script when zoomed in,
 * scene outline when collapsed. */
export function editorMode(state: CanvasViewState): "full" | "outline" {
  return isCollapsed(state) ? "outline" : "full";
}

export function outlineColor(shot: Pick<Shot, "provenance">): string {
  return PROVENANCE_OUTLINE[shot.provenance];
}

export interface ShotNodeView {
  kind: "shot";
  id: string;
  sceneId: string | null;
  outlineColor: string;
  description: string;
  highlighted: boolean;
  pending: false;
  position: [number, number];
}

export interface SceneNodeView {
  kind: "scene";
  id: string;
  title: string;
  color: string;
  collapsed: boolean;
  keyframeShot: string | null;
  shotIds: string[];
  pending: boolean;
  generatedOrigin: boolean;
}

export interface PendingSceneNodeView {
  kind: "pending-scene";
  title: string;
  insertIndex: number;
  pending: true;
}

export type NodeView = ShotNodeView | SceneNodeView | PendingSceneNodeView;

export interface CanvasRender {
  scenes: SceneNodeView[];
  shots: ShotNodeView[];
  pendingScenes: PendingSceneNodeView[];
  editor: "full" | "outline";
}

export function renderCanvas(
  project: Project,
  state: CanvasViewState,
  options: {
    highlightedShotIds?: string[];
    pendingScenes?: { title: string; insert_index: number }[];
  } = {},
): CanvasRender {
  const highlighted = new Set(options.highlightedShotIds ?? []);
  const version = project.versions.find((v) => v.version_id === project.active_version);
  const sceneIds = version ? version.scenes : [];
  const collapsed = isCollapsed(state);

  const scenes: SceneNodeView[] = sceneIds.map((sceneId) => {
    const scene = project.scenes[sceneId];
    return {
      kind: "scene",
      id: sceneId,
      title: scene.title,
      color: scene.color,
      collapsed,
      keyframeShot: scene.keyframe_shot,
      shotIds: [...scene.shots],
      pending: false,
      generatedOrigin: scene.generated,
    };
  });

  const shots: ShotNodeView[] = [];
  if (!collapsed) {
    // full detail: every shot node, grouped or loose, with provenance styling
    const sceneOf = new Map<string, string>();
    for (const sceneId of sceneIds) {
      for (const shotId of project.scenes[sceneId].shots) sceneOf.set(shotId, sceneId);
    }
    for (const [shotId, shot] of Object.entries(project.shots)) {
      shots.push({
        kind: "shot",
        id: shotId,
        sceneId: sceneOf.get(shotId) ?? null,
        outlineColor: outlineColor(shot),
        description: shot.description,
        highlighted: highlighted.has(shotId),
        pending: false,
        position: state.layout[shotId] ?? shot.canvas_pos,
      });
    }
  }

  const pendingScenes: PendingSceneNodeView[] = (options.pendingScenes ?? []).map((p) => ({
    kind: "pending-scene",
    title: p.title,
    insertIndex: p.insert_index,
    pending: true,
  }));

  return { scenes, shots, pendingScenes, editor: editorMode(state) };
}

/** The plus-button on the edge between two scenes (or at a story
 * boundary): the gap this click asks the engine to bridge. */
export interface GapTarget {
  prevSceneId: string | null;
  nextSceneId: string | null;
  insertIndex: number;
}

export function gapAt(project: Project, edgeIndex: number): GapTarget {
  const version = project.versions.find((v) => v.version_id === project.active_version);
  const order = version ? version.scenes : [];
  const prev = edgeIndex > 0 ? order[edgeIndex - 1] : null;
  const next = edgeIndex < order.length ? order[edgeIndex] : null;
  return { prevSceneId: prev, nextSceneId: next, insertIndex: edgeIndex };
}

// -- compare mode

export interface CompareRow {
  index: number;
  cells: (string | null)[]; // scene id per version, null when a version is shorter
}

/** Scene k of every version shares row k, for all k up to the longest
 * version; shorter versions leave empty cells. */
export function compareRows(project: Project, versionIds: string[]): CompareRow[] {
  const lists = versionIds.map((vid) => {
    const version = project.versions.find((v) => v.version_id === vid);
    if (!version) throw new Error(`unknown version ${vid}`);
    return version.scenes;
  });
  const depth = Math.max(0, ...lists.map((l) => l.length));
  const rows: CompareRow[] = [];
  for (let k = 0; k < depth; k++) {
    rows.push({ index: k, cells: lists.map((l) => l[k] ?? null) });
  }
  return rows;
}
