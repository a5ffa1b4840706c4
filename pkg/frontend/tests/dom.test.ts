import assert from "node:assert/strict";
import { test } from "node:test";

import { initialViewState, renderCanvas, setZoom, PROVENANCE_OUTLINE, COLLAPSE_THRESHOLD } from "../src/canvas";
import { DocumentLike, ElementLike, mountCanvas } from "../src/dom";

class FakeElement implements ElementLike {
  style: Record<string, string> = {};
  textContent: string | null = null;
  className = "";
  dataset: Record<string, string | undefined> = {};
  children: FakeElement[] = [];
  handlers: Record<string, Array<(event: any) => void>> = {};

  appendChild(child: ElementLike): void {
    this.children.push(child as FakeElement);
  }

  addEventListener(type: string, handler: (event: any) => void): void {
    (this.handlers[type] ??= []).push(handler);
  }

  replaceChildren(...children: ElementLike[]): void {
    this.children = children as FakeElement[];
  }

  click(): void {
    for (const handler of this.handlers["click"] ?? []) handler({});
  }

  all(): FakeElement[] {
    return [this, ...this.children.flatMap((c) => c.all())];
  }
}

const doc: DocumentLike = { createElement: () => new FakeElement() };

function fixtureProject() {
  return {
    schema_version: 1,
    project_id: "p",
    story_context: "",
    active_version: "v1",
    id_seq: 1,
    versions: [{ version_id: "v1", name: "o", scenes: ["sc1"], origin: "original" as const, variation_prompt: null }],
    scenes: {
      sc1: {
        scene_id: "sc1",
        title: "Scene",
        color: "#5B8DEF",
        description: "",
        shots: ["sh1", "sh2"],
        script: "",
        script_spans: [],
        narration: null,
        music: null,
        correspondences: [],
        keyframe_shot: "sh1",
        generated: false,
      },
    },
    shots: {
      sh1: { shot_id: "sh1", asset_id: "a", provenance: "captured" as const, description: "one", canvas_pos: [0, 0] as [number, number], generation: null, trim: null },
      sh2: {
        shot_id: "sh2",
        asset_id: "a",
        provenance: "generated" as const,
        description: "two",
        canvas_pos: [0, 0] as [number, number],
        generation: { job_id: "j", source_prompt: "", explanation: "", base_keyframe: null, neighbor_shots: null },
        trim: null,
      },
    },
    assets: {},
    suggestions: [],
    disliked_suggestions: [],
  };
}

test("mounted shot nodes carry provenance outlines", () => {
  const root = new FakeElement();
  const state = initialViewState();
  mountCanvas(doc, root, renderCanvas(fixtureProject(), state), state);
  const shots = root.all().filter((e) => e.dataset.shotId && e.className.startsWith("shot-node"));
  assert.equal(shots.length, 2);
  const byId = Object.fromEntries(shots.map((e) => [e.dataset.shotId, e.style["outline"]]));
  assert.equal(byId["sh1"], `3px solid ${PROVENANCE_OUTLINE.captured}`);
  assert.equal(byId["sh2"], `3px solid ${PROVENANCE_OUTLINE.generated}`);
});

test("collapsed mount shows keyframes instead of shot nodes", () => {
  const root = new FakeElement();
  const state = setZoom(initialViewState(), COLLAPSE_THRESHOLD - 0.05);
  mountCanvas(doc, root, renderCanvas(fixtureProject(), state), state);
  const shots = root.all().filter((e) => e.className.startsWith("shot-node"));
  const keyframes = root.all().filter((e) => e.className === "keyframe");
  assert.equal(shots.length, 0);
  assert.equal(keyframes.length, 1);
  assert.equal(keyframes[0].dataset.shotId, "sh1");
});

test("plus buttons fire with their edge index", () => {
  const root = new FakeElement();
  const state = initialViewState();
  const clicks: number[] = [];
  mountCanvas(doc, root, renderCanvas(fixtureProject(), state), state, {
    onPlusButton: (edge) => clicks.push(edge),
  });
  const buttons = root.all().filter((e) => e.className === "plus-button");
  assert.equal(buttons.length, 2); // one edge before and one after the single scene
  buttons.forEach((b) => b.click());
  assert.deepEqual(clicks, [0, 1]);
});

test("pending scenes mount with accept and dismiss affordances", () => {
  const root = new FakeElement();
  const state = initialViewState();
  const accepted: number[] = [];
  mountCanvas(
    doc,
    root,
    renderCanvas(fixtureProject(), state, { pendingScenes: [{ title: "Bridge", insert_index: 1 }] }),
    state,
    { onAcceptPendingScene: (i) => accepted.push(i) },
  );
  const pending = root.all().filter((e) => e.className.includes("pending"));
  assert.equal(pending.length, 1);
  const acceptButton = pending[0].children.find((c) => c.textContent === "accept")!;
  acceptButton.click();
  assert.deepEqual(accepted, [0]);
});
