/**
 * Thin DOM mount for the canvas: turns the pure view-models into elements.
 *
 * Written against a minimal structural element interface so the layer is
 * testable headlessly; a browser `document` satisfies it as-is.
 */

import { CanvasRender, CanvasViewState, setZoom } from "./canvas";

export interface ElementLike {
  style: Record<string, string>;
  textContent: string | null;
  className: string;
  dataset: Record<string, string | undefined>;
  appendChild(child: ElementLike): void;
  addEventListener(type: string, handler: (event: any) => void): void;
  replaceChildren(...children: ElementLike[]): void;
}

export interface DocumentLike {
  createElement(tag: string): ElementLike;
}

export interface CanvasCallbacks {
  onPlusButton?: (edgeIndex: number) => void;
  onSelectShot?: (shotId: string) => void;
  onAcceptPendingScene?: (index: number) => void;
  onDismissPendingScene?: (index: number) => void;
  onZoom?: (state: CanvasViewState) => void;
}

export function mountCanvas(
  doc: DocumentLike,
  root: ElementLike,
  render: CanvasRender,
  state: CanvasViewState,
  callbacks: CanvasCallbacks = {},
): void {
  const children: ElementLike[] = [];

  render.scenes.forEach((scene, index) => {
    children.push(plusButton(doc, index, callbacks));

    const node = doc.createElement("div");
    node.className = scene.collapsed ? "scene-node collapsed" : "scene-node";
    node.dataset.sceneId = scene.id;
    node.style["borderTop"] = `4px solid ${scene.color}`;
    if (scene.generatedOrigin) node.className += " generated-origin";

    const title = doc.createElement("h3");
    title.textContent = scene.title;
    node.appendChild(title);

    if (scene.collapsed) {
      // collapsed scenes show only their keyframe
      const keyframe = doc.createElement("div");
      keyframe.className = "keyframe";
      keyframe.dataset.shotId = scene.keyframeShot ?? undefined;
      node.appendChild(keyframe);
    } else {
      for (const shotId of scene.shotIds) {
        const view = render.shots.find((s) => s.id === shotId);
        if (view) node.appendChild(shotNode(doc, view, callbacks));
      }
    }
    children.push(node);
  });
  children.push(plusButton(doc, render.scenes.length, callbacks));

  // loose shots (the ungrouped pool) render after the storyline
  for (const view of render.shots.filter((s) => s.sceneId === null)) {
    children.push(shotNode(doc, view, callbacks));
  }

  render.pendingScenes.forEach((pending, index) => {
    const node = doc.createElement("div");
    node.className = "scene-node pending";
    node.textContent = pending.title;
    const accept = doc.createElement("button");
    accept.textContent = "accept";
    accept.addEventListener("click", () => callbacks.onAcceptPendingScene?.(index));
    const dismiss = doc.createElement("button");
    dismiss.textContent = "dismiss";
    dismiss.addEventListener("click", () => callbacks.onDismissPendingScene?.(index));
    node.appendChild(accept);
    node.appendChild(dismiss);
    children.push(node);
  });

  root.replaceChildren(...children);
  root.addEventListener("wheel", (event: { deltaY: number }) => {
    callbacks.onZoom?.(setZoom(state, state.zoom * (event.deltaY < 0 ? 1.1 : 0.9)));
  });
}

function shotNode(
  doc: DocumentLike,
  view: { id: string; outlineColor: string; description: string; highlighted: boolean },
  callbacks: CanvasCallbacks,
): ElementLike {
  const node = doc.createElement("div");
  node.className = view.highlighted ? "shot-node highlighted" : "shot-node";
  node.dataset.shotId = view.id;
  node.style["outline"] = `3px solid ${view.outlineColor}`;
  node.textContent = view.description;
  node.addEventListener("click", () => callbacks.onSelectShot?.(view.id));
  return node;
}

function plusButton(doc: DocumentLike, edgeIndex: number, callbacks: CanvasCallbacks): ElementLike {
  const button = doc.createElement("button");
  button.className = "plus-button";
  button.textContent = "+";
  button.dataset.edgeIndex = String(edgeIndex);
  button.addEventListener("click", () => callbacks.onPlusButton?.(edgeIndex));
  return button;
}
