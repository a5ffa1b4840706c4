"""Reversible mutations over the story graph, plus the append-only event log.

Every state change flows through :class:`MutationLog.apply`, which validates
the full project after each mutation and rolls back on violation, so errors
always leave the project untouched.  Each primitive mutation returns an
exact inverse; ``batch`` composes primitives atomically, which is how the
higher-level edits (move shot, delete scene, duplicate version) keep
implicit bookkeeping like scene keyframes exactly undoable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import InvariantViolation, UnknownId
from .model import (
    AssetRef,
    Correspondence,
    Project,
    Scene,
    Shot,
    StoryVersion,
    Suggestion,
    validate_project,
)


@dataclass
class Mutation:
    kind: str
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.params}

    @classmethod
    def from_dict(cls, data: dict) -> "Mutation":
        return cls(kind=data["kind"], params=data.get("params", {}))


def batch(mutations: list[Mutation]) -> Mutation:
    return Mutation("batch", {"mutations": [m.to_dict() for m in mutations]})


# ---------------------------------------------------------------------------
# Primitive handlers: (project, params) -> inverse Mutation


def _set_story_context(project: Project, p: dict) -> Mutation:
    old = project.story_context
    project.story_context = p["text"]
    return Mutation("set_story_context", {"text": old})


def _set_id_seq(project: Project, p: dict) -> Mutation:
    old = project.id_seq
    project.id_seq = p["value"]
    return Mutation("set_id_seq", {"value": old})


def _register_asset(project: Project, p: dict) -> Mutation:
    asset = AssetRef.from_dict(p["asset"])
    if asset.asset_id in project.assets:
        raise InvariantViolation("asset-unique", f"asset {asset.asset_id} already registered")
    project.assets[asset.asset_id] = asset
    return Mutation("unregister_asset", {"asset_id": asset.asset_id})


def _unregister_asset(project: Project, p: dict) -> Mutation:
    asset = project.asset(p["asset_id"])
    for shot in project.shots.values():
        if shot.asset_id == asset.asset_id:
            raise InvariantViolation("asset-in-use", f"asset {asset.asset_id} used by shot {shot.shot_id}")
    for scene in project.scenes.values():
        if asset.asset_id in (scene.narration, scene.music):
            raise InvariantViolation("asset-in-use", f"asset {asset.asset_id} used by scene {scene.scene_id}")
    del project.assets[asset.asset_id]
    return Mutation("register_asset", {"asset": asset.to_dict()})


def _create_shot(project: Project, p: dict) -> Mutation:
    shot = Shot.from_dict(p["shot"])
    if shot.shot_id in project.shots:
        raise InvariantViolation("shot-unique", f"shot {shot.shot_id} already exists")
    project.asset(shot.asset_id)
    project.shots[shot.shot_id] = shot
    return Mutation("remove_shot", {"shot_id": shot.shot_id})


def _remove_shot(project: Project, p: dict) -> Mutation:
    shot = project.shot(p["shot_id"])
    for scene in project.scenes.values():
        if shot.shot_id in scene.shots:
            raise InvariantViolation("shot-in-scene", f"shot {shot.shot_id} still referenced by {scene.scene_id}")
    del project.shots[shot.shot_id]
    return Mutation("create_shot", {"shot": shot.to_dict()})


def _set_shot_field(field_name: str):
    def handler(project: Project, p: dict) -> Mutation:
        shot = project.shot(p["shot_id"])
        old = getattr(shot, field_name)
        new = p["value"]
        if field_name == "canvas_pos":
            old_value, new_value = list(old), tuple(new)
        elif field_name == "trim":
            old_value = list(old) if old else None
            new_value = tuple(new) if new else None
        elif field_name == "generation":
            from .model import GenerationProvenance

            old_value = old.to_dict() if old else None
            new_value = GenerationProvenance.from_dict(new) if new else None
        else:
            old_value, new_value = old, new
        setattr(shot, field_name, new_value)
        return Mutation(f"set_shot_{field_name}", {"shot_id": shot.shot_id, "value": old_value})

    return handler


def _set_shot_asset(project: Project, p: dict) -> Mutation:
    shot = project.shot(p["shot_id"])
    project.asset(p["asset_id"])
    old = shot.asset_id
    shot.asset_id = p["asset_id"]
    return Mutation("set_shot_asset", {"shot_id": shot.shot_id, "asset_id": old})


def _create_scene(project: Project, p: dict) -> Mutation:
    scene = Scene.from_dict(p["scene"])
    if scene.scene_id in project.scenes:
        raise InvariantViolation("scene-unique", f"scene {scene.scene_id} already exists")
    project.scenes[scene.scene_id] = scene
    return Mutation("remove_scene", {"scene_id": scene.scene_id})


def _remove_scene(project: Project, p: dict) -> Mutation:
    scene = project.scene(p["scene_id"])
    for version in project.versions:
        if scene.scene_id in version.scenes:
            raise InvariantViolation(
                "scene-in-version", f"scene {scene.scene_id} still referenced by {version.version_id}"
            )
    del project.scenes[scene.scene_id]
    return Mutation("create_scene", {"scene": scene.to_dict()})


def _set_scene_field(field_name: str):
    def handler(project: Project, p: dict) -> Mutation:
        scene = project.scene(p["scene_id"])
        old = getattr(scene, field_name)
        if field_name == "script_spans":
            old = list(old)
        setattr(scene, field_name, p["value"])
        return Mutation(f"set_scene_{field_name}", {"scene_id": scene.scene_id, "value": old})

    return handler


def _set_scene_script(project: Project, p: dict) -> Mutation:
    scene = project.scene(p["scene_id"])
    old_script = scene.script
    old_corrs = [c.to_dict() for c in scene.correspondences]
    scene.script = p["value"]
    # drop correspondences the new text can no longer satisfy
    cleared = False
    if any(c.span[1] > len(scene.script) for c in scene.correspondences):
        scene.correspondences = []
        cleared = True
    inverse_script = Mutation("set_scene_script", {"scene_id": scene.scene_id, "value": old_script})
    if cleared:
        return batch([inverse_script, Mutation("set_correspondences", {"scene_id": scene.scene_id, "value": old_corrs})])
    return inverse_script


def _set_correspondences(project: Project, p: dict) -> Mutation:
    scene = project.scene(p["scene_id"])
    old = [c.to_dict() for c in scene.correspondences]
    scene.correspondences = [Correspondence.from_dict(c) for c in p["value"]]
    return Mutation("set_correspondences", {"scene_id": scene.scene_id, "value": old})


def _insert_shot_ref(project: Project, p: dict) -> Mutation:
    scene = project.scene(p["scene_id"])
    shot_id = p["shot_id"]
    project.shot(shot_id)
    if shot_id in scene.shots:
        raise InvariantViolation("scene-shot-uniqueness", f"shot {shot_id} already in scene {scene.scene_id}")
    index = max(0, min(p.get("index", len(scene.shots)), len(scene.shots)))
    scene.shots.insert(index, shot_id)
    return Mutation("remove_shot_ref", {"scene_id": scene.scene_id, "shot_id": shot_id})


def _remove_shot_ref(project: Project, p: dict) -> Mutation:
    scene = project.scene(p["scene_id"])
    shot_id = p["shot_id"]
    if shot_id not in scene.shots:
        raise UnknownId(f"shot {shot_id} not in scene {scene.scene_id}")
    index = scene.shots.index(shot_id)
    scene.shots.remove(shot_id)
    return Mutation("insert_shot_ref", {"scene_id": scene.scene_id, "shot_id": shot_id, "index": index})


def _reorder_shots(project: Project, p: dict) -> Mutation:
    scene = project.scene(p["scene_id"])
    order = list(p["order"])
    if sorted(order) != sorted(scene.shots):
        raise InvariantViolation("reorder-permutation", f"order is not a permutation of scene {scene.scene_id} shots")
    old = list(scene.shots)
    scene.shots = order
    return Mutation("reorder_shots", {"scene_id": scene.scene_id, "order": old})


def _insert_scene_ref(project: Project, p: dict) -> Mutation:
    version = project.version(p["version_id"])
    scene_id = p["scene_id"]
    project.scene(scene_id)
    if scene_id in version.scenes:
        raise InvariantViolation("scene-position-uniqueness", f"scene {scene_id} already in version")
    index = max(0, min(p.get("index", len(version.scenes)), len(version.scenes)))
    version.scenes.insert(index, scene_id)
    return Mutation("remove_scene_ref", {"version_id": version.version_id, "scene_id": scene_id})


def _remove_scene_ref(project: Project, p: dict) -> Mutation:
    version = project.version(p["version_id"])
    scene_id = p["scene_id"]
    if scene_id not in version.scenes:
        raise UnknownId(f"scene {scene_id} not in version {version.version_id}")
    index = version.scenes.index(scene_id)
    version.scenes.remove(scene_id)
    return Mutation("insert_scene_ref", {"version_id": version.version_id, "scene_id": scene_id, "index": index})


def _reorder_scenes(project: Project, p: dict) -> Mutation:
    version = project.version(p["version_id"])
    order = list(p["order"])
    if sorted(order) != sorted(version.scenes):
        raise InvariantViolation("reorder-permutation", "order is not a permutation of the version's scenes")
    old = list(version.scenes)
    version.scenes = order
    return Mutation("reorder_scenes", {"version_id": version.version_id, "order": old})


def _create_version(project: Project, p: dict) -> Mutation:
    version = StoryVersion.from_dict(p["version"])
    if any(v.version_id == version.version_id for v in project.versions):
        raise InvariantViolation("version-unique", f"version {version.version_id} already exists")
    index = max(0, min(p.get("index", len(project.versions)), len(project.versions)))
    project.versions.insert(index, version)
    return Mutation("remove_version", {"version_id": version.version_id})


def _remove_version(project: Project, p: dict) -> Mutation:
    version = project.version(p["version_id"])
    if version.version_id == project.active_version:
        raise InvariantViolation("active-version", "cannot remove the active version")
    index = next(i for i, v in enumerate(project.versions) if v.version_id == version.version_id)
    project.versions.pop(index)
    return Mutation("create_version", {"version": version.to_dict(), "index": index})


def _rename_version(project: Project, p: dict) -> Mutation:
    version = project.version(p["version_id"])
    old = version.name
    version.name = p["name"]
    return Mutation("rename_version", {"version_id": version.version_id, "name": old})


def _set_active_version(project: Project, p: dict) -> Mutation:
    project.version(p["version_id"])
    old = project.active_version
    project.active_version = p["version_id"]
    return Mutation("set_active_version", {"version_id": old})


def _add_suggestion(project: Project, p: dict) -> Mutation:
    suggestion = Suggestion.from_dict(p["suggestion"])
    if any(s.suggestion_id == suggestion.suggestion_id for s in project.suggestions):
        raise InvariantViolation("suggestion-unique", f"suggestion {suggestion.suggestion_id} already exists")
    index = max(0, min(p.get("index", len(project.suggestions)), len(project.suggestions)))
    project.suggestions.insert(index, suggestion)
    return Mutation("remove_suggestion", {"suggestion_id": suggestion.suggestion_id})


def _remove_suggestion(project: Project, p: dict) -> Mutation:
    for i, suggestion in enumerate(project.suggestions):
        if suggestion.suggestion_id == p["suggestion_id"]:
            project.suggestions.pop(i)
            return Mutation("add_suggestion", {"suggestion": suggestion.to_dict(), "index": i})
    raise UnknownId(f"unknown suggestion: {p['suggestion_id']}")


def _set_suggestion_status(project: Project, p: dict) -> Mutation:
    for suggestion in project.suggestions:
        if suggestion.suggestion_id == p["suggestion_id"]:
            old = suggestion.status
            suggestion.status = p["status"]
            return Mutation(
                "set_suggestion_status", {"suggestion_id": suggestion.suggestion_id, "status": old}
            )
    raise UnknownId(f"unknown suggestion: {p['suggestion_id']}")


def _add_disliked(project: Project, p: dict) -> Mutation:
    text = p["text"]
    if text not in project.disliked_suggestions:
        project.disliked_suggestions.append(text)
    return Mutation("remove_disliked", {"text": text})


def _remove_disliked(project: Project, p: dict) -> Mutation:
    text = p["text"]
    if text in project.disliked_suggestions:
        project.disliked_suggestions.remove(text)
    return Mutation("add_disliked", {"text": text})


def _batch(project: Project, p: dict) -> Mutation:
    inverses: list[Mutation] = []
    for sub in p["mutations"]:
        inverses.append(_dispatch(project, Mutation.from_dict(sub)))
    inverses.reverse()
    return batch(inverses)


_HANDLERS: dict[str, Callable[[Project, dict], Mutation]] = {
    "set_story_context": _set_story_context,
    "set_id_seq": _set_id_seq,
    "register_asset": _register_asset,
    "unregister_asset": _unregister_asset,
    "create_shot": _create_shot,
    "remove_shot": _remove_shot,
    "set_shot_description": _set_shot_field("description"),
    "set_shot_canvas_pos": _set_shot_field("canvas_pos"),
    "set_shot_trim": _set_shot_field("trim"),
    "set_shot_generation": _set_shot_field("generation"),
    "set_shot_asset": _set_shot_asset,
    "create_scene": _create_scene,
    "remove_scene": _remove_scene,
    "set_scene_title": _set_scene_field("title"),
    "set_scene_color": _set_scene_field("color"),
    "set_scene_description": _set_scene_field("description"),
    "set_scene_script": _set_scene_script,
    "set_scene_script_spans": _set_scene_field("script_spans"),
    "set_scene_narration": _set_scene_field("narration"),
    "set_scene_music": _set_scene_field("music"),
    "set_scene_keyframe": _set_scene_field("keyframe_shot"),
    "set_correspondences": _set_correspondences,
    "insert_shot_ref": _insert_shot_ref,
    "remove_shot_ref": _remove_shot_ref,
    "reorder_shots": _reorder_shots,
    "insert_scene_ref": _insert_scene_ref,
    "remove_scene_ref": _remove_scene_ref,
    "reorder_scenes": _reorder_scenes,
    "create_version": _create_version,
    "remove_version": _remove_version,
    "rename_version": _rename_version,
    "set_active_version": _set_active_version,
    "add_suggestion": _add_suggestion,
    "remove_suggestion": _remove_suggestion,
    "set_suggestion_status": _set_suggestion_status,
    "add_disliked": _add_disliked,
    "remove_disliked": _remove_disliked,
    "batch": _batch,
}


def _dispatch(project: Project, mutation: Mutation) -> Mutation:
    try:
        handler = _HANDLERS[mutation.kind]
    except KeyError:
        raise UnknownId(f"unknown mutation kind: {mutation.kind}") from None
    return handler(project, mutation.params)


def apply_mutation(project: Project, mutation: Mutation) -> Mutation:
    """Apply one mutation, re-validate all invariants, and return its inverse.

    On any error the project is restored to its prior state before the
    exception propagates.
    """
    snapshot = project.to_dict()
    try:
        inverse = _dispatch(project, mutation)
        validate_project(project)
        return inverse
    except Exception:
        restored = Project.from_dict(snapshot)
        project.__dict__.update(restored.__dict__)
        raise


# ---------------------------------------------------------------------------
# Event log


@dataclass
class EventRecord:
    seq: int
    op: str  # apply | undo | redo
    mutation: dict
    inverse: dict
    target: Optional[int] = None  # seq of the record an undo/redo refers to

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "op": self.op,
            "mutation": self.mutation,
            "inverse": self.inverse,
            "target": self.target,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EventRecord":
        return cls(
            seq=data["seq"],
            op=data["op"],
            mutation=data["mutation"],
            inverse=data["inverse"],
            target=data.get("target"),
        )


class MutationLog:
    """Append-only mutation history with undo/redo.

    Undo applies the recorded inverse as a new log entry, so the log itself
    never rewrites history while project state returns exactly to any
    earlier serialization.
    """

    def __init__(self) -> None:
        self.records: list[EventRecord] = []
        self._undo_stack: list[int] = []  # indices into records
        self._redo_stack: list[int] = []

    @property
    def revision(self) -> int:
        return len(self.records)

    def apply(self, project: Project, mutation: Mutation) -> EventRecord:
        inverse = apply_mutation(project, mutation)
        record = EventRecord(
            seq=len(self.records) + 1, op="apply", mutation=mutation.to_dict(), inverse=inverse.to_dict()
        )
        self.records.append(record)
        self._undo_stack.append(len(self.records) - 1)
        self._redo_stack.clear()
        return record

    def can_undo(self) -> bool:
        return bool(self._undo_stack)

    def can_redo(self) -> bool:
        return bool(self._redo_stack)

    def undo(self, project: Project) -> EventRecord:
        if not self._undo_stack:
            raise InvariantViolation("undo-empty", "nothing to undo")
        idx = self._undo_stack.pop()
        original = self.records[idx]
        apply_mutation(project, Mutation.from_dict(original.inverse))
        record = EventRecord(
            seq=len(self.records) + 1,
            op="undo",
            mutation=original.inverse,
            inverse=original.mutation,
            target=original.seq,
        )
        self.records.append(record)
        self._redo_stack.append(idx)
        return record

    def redo(self, project: Project) -> EventRecord:
        if not self._redo_stack:
            raise InvariantViolation("redo-empty", "nothing to redo")
        idx = self._redo_stack.pop()
        original = self.records[idx]
        apply_mutation(project, Mutation.from_dict(original.mutation))
        record = EventRecord(
            seq=len(self.records) + 1,
            op="redo",
            mutation=original.mutation,
            inverse=original.inverse,
            target=original.seq,
        )
        self.records.append(record)
        self._undo_stack.append(len(self.records) - 1)
        return record

    # -- persistence (JSONL replay)

    def to_lines(self) -> list[dict]:
        return [r.to_dict() for r in self.records]

    @classmethod
    def from_lines(cls, lines: list[dict]) -> "MutationLog":
        log = cls()
        for data in lines:
            record = EventRecord.from_dict(data)
            log.records.append(record)
            idx = len(log.records) - 1
            if record.op == "apply":
                log._undo_stack.append(idx)
                log._redo_stack.clear()
            elif record.op == "undo":
                if log._undo_stack:
                    log._redo_stack.append(log._undo_stack.pop())
            elif record.op == "redo":
                if log._redo_stack:
                    log._redo_stack.pop()
                log._undo_stack.append(idx)
        return log


# ---------------------------------------------------------------------------
# Composite edit builders (keyframe bookkeeping made explicit so inverses
# stay exact)


def plan_ids(project: Project, prefixes: list[str]) -> tuple[list[str], Mutation]:
    """Reserve fresh sequential ids without touching the project.

    Returns the ids plus a ``set_id_seq`` mutation that must be included in
    the same batch as whatever uses them, so undo rolls the counter back.
    """
    seq = project.id_seq
    ids = []
    for prefix in prefixes:
        seq += 1
        ids.append(f"{prefix}-{seq:04d}")
    return ids, Mutation("set_id_seq", {"value": seq})


def _keyframe_fixups(scene: Scene, new_shots: list[str]) -> list[Mutation]:
    """Mutations needed so keyframe_shot stays valid for the new shot list."""
    fixups = []
    if not new_shots:
        if scene.keyframe_shot is not None:
            fixups.append(Mutation("set_scene_keyframe", {"scene_id": scene.scene_id, "value": None}))
    elif scene.keyframe_shot not in new_shots:
        fixups.append(Mutation("set_scene_keyframe", {"scene_id": scene.scene_id, "value": new_shots[0]}))
    return fixups


def build_move_shot(project: Project, shot_id: str, to_scene_id: str, index: Optional[int] = None) -> Mutation:
    """Move a shot between scenes (or from the loose pool) in the active version."""
    project.shot(shot_id)
    to_scene = project.scene(to_scene_id)
    from_scene = project.scene_of_shot(shot_id)
    steps: list[Mutation] = []
    if from_scene is not None:
        if from_scene.scene_id == to_scene_id:
            raise InvariantViolation("move-noop", f"shot {shot_id} already in scene {to_scene_id}")
        steps.append(Mutation("remove_shot_ref", {"scene_id": from_scene.scene_id, "shot_id": shot_id}))
        remaining = [s for s in from_scene.shots if s != shot_id]
        steps.extend(_keyframe_fixups(from_scene, remaining))
    target_index = len(to_scene.shots) if index is None else index
    steps.append(Mutation("insert_shot_ref", {"scene_id": to_scene_id, "shot_id": shot_id, "index": target_index}))
    if not to_scene.shots:
        steps.append(Mutation("set_scene_keyframe", {"scene_id": to_scene_id, "value": shot_id}))
    return batch(steps)


def build_remove_shot_from_scene(project: Project, scene_id: str, shot_id: str) -> Mutation:
    scene = project.scene(scene_id)
    if shot_id not in scene.shots:
        raise UnknownId(f"shot {shot_id} not in scene {scene_id}")
    steps = [Mutation("remove_shot_ref", {"scene_id": scene_id, "shot_id": shot_id})]
    remaining = [s for s in scene.shots if s != shot_id]
    steps.extend(_keyframe_fixups(scene, remaining))
    return batch(steps)


def build_add_shot(
    project: Project,
    shot: Shot,
    scene_id: Optional[str] = None,
    index: Optional[int] = None,
) -> Mutation:
    steps = [Mutation("create_shot", {"shot": shot.to_dict()})]
    if scene_id is not None:
        scene = project.scene(scene_id)
        target_index = len(scene.shots) if index is None else index
        steps.append(Mutation("insert_shot_ref", {"scene_id": scene_id, "shot_id": shot.shot_id, "index": target_index}))
        if not scene.shots:
            steps.append(Mutation("set_scene_keyframe", {"scene_id": scene_id, "value": shot.shot_id}))
    return batch(steps)


def build_add_scene(project: Project, scene: Scene, version_id: str, index: Optional[int] = None) -> Mutation:
    version = project.version(version_id)
    target_index = len(version.scenes) if index is None else index
    return batch(
        [
            Mutation("create_scene", {"scene": scene.to_dict()}),
            Mutation("insert_scene_ref", {"version_id": version_id, "scene_id": scene.scene_id, "index": target_index}),
        ]
    )


def build_delete_scene(project: Project, version_id: str, scene_id: str) -> Mutation:
    """Delete a scene; its shots return to the loose pool."""
    project.version(version_id)
    project.scene(scene_id)
    return batch(
        [
            Mutation("remove_scene_ref", {"version_id": version_id, "scene_id": scene_id}),
            Mutation("remove_scene", {"scene_id": scene_id}),
        ]
    )


def duplicate_version(log: MutationLog, project: Project, version_id: str, name: str) -> StoryVersion:
    """Deep-copy a version's scene list and scene contents under fresh scene
    ids; shots are shared by reference and assets are not copied."""
    source = project.version(version_id)
    ids, seq_step = plan_ids(project, ["scene"] * len(source.scenes) + ["version"])
    new_scene_ids, new_version_id = ids[:-1], ids[-1]
    steps: list[Mutation] = [seq_step]
    for scene_id, new_id in zip(source.scenes, new_scene_ids):
        scene = project.scene(scene_id)
        copy = Scene.from_dict(scene.to_dict())
        copy.scene_id = new_id
        steps.append(Mutation("create_scene", {"scene": copy.to_dict()}))
    new_version = StoryVersion(
        version_id=new_version_id,
        name=name,
        scenes=new_scene_ids,
        origin="duplicate",
    )
    steps.append(Mutation("create_version", {"version": new_version.to_dict()}))
    log.apply(project, batch(steps))
    return project.version(new_version.version_id)
