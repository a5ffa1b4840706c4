import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from storyweave.errors import InvariantViolation, UnknownId
from storyweave.model import Scene, project_state_json, validate_project
from storyweave.mutations import (
    Mutation,
    MutationLog,
    batch,
    build_delete_scene,
    build_move_shot,
    duplicate_version,
)

from .test_model import tiny_project


def fresh():
    return tiny_project(), MutationLog()


def test_move_shot_between_scenes():
    p, log = fresh()
    p.scenes["scene-2"] = Scene(scene_id="scene-2", title="Two", color="#E8743B")
    p.versions[0].scenes.append("scene-2")
    log.apply(p, build_move_shot(p, "shot-1", "scene-2"))
    assert "shot-1" in p.scenes["scene-2"].shots
    assert "shot-1" not in p.scenes["scene-1"].shots
    # destination keyframe defaults to the arriving shot; source re-defaults
    assert p.scenes["scene-2"].keyframe_shot == "shot-1"
    assert p.scenes["scene-1"].keyframe_shot == "shot-2"


def test_reorder_scenes_applies_given_order():
    p, log = fresh()
    for sid, color in (("scene-2", "#E8743B"), ("scene-3", "#6BBF59")):
        p.scenes[sid] = Scene(scene_id=sid, title=sid, color=color)
        p.versions[0].scenes.append(sid)
    log.apply(p, Mutation("reorder_scenes", {"version_id": p.active_version, "order": ["scene-3", "scene-1", "scene-2"]}))
    assert p.versions[0].scenes == ["scene-3", "scene-1", "scene-2"]


def test_reorder_rejects_non_permutation():
    p, log = fresh()
    with pytest.raises(InvariantViolation):
        log.apply(p, Mutation("reorder_shots", {"scene_id": "scene-1", "order": ["shot-1", "shot-1"]}))


def test_delete_scene_returns_shots_to_pool_and_undo_restores_bytes():
    p, log = fresh()
    before = project_state_json(p)
    log.apply(p, build_delete_scene(p, p.active_version, "scene-1"))
    assert "scene-1" not in p.scenes
    assert set(p.ungrouped_shots()) == {"shot-1", "shot-2"}  # loose pool keeps the shots
    log.undo(p)
    assert project_state_json(p) == before


def test_unknown_target_leaves_project_unchanged():
    p, log = fresh()
    before = project_state_json(p)
    with pytest.raises(UnknownId):
        log.apply(p, Mutation("set_shot_description", {"shot_id": "ghost", "value": "x"}))
    assert project_state_json(p) == before


def test_invariant_violation_rolls_back_batches_atomically():
    p, log = fresh()
    before = project_state_json(p)
    bad = batch(
        [
            Mutation("set_scene_title", {"scene_id": "scene-1", "value": "renamed"}),
            Mutation("insert_shot_ref", {"scene_id": "scene-1", "shot_id": "shot-1", "index": 0}),
        ]
    )
    with pytest.raises(InvariantViolation):
        log.apply(p, bad)
    assert project_state_json(p) == before


def test_provenance_is_immutable_no_mutation_kind_exists():
    p, log = fresh()
    with pytest.raises(UnknownId):
        log.apply(p, Mutation("set_shot_provenance", {"shot_id": "shot-1", "value": "generated"}))


def test_duplicate_version_shares_shots_but_copies_scenes():
    p, log = fresh()
    copy = duplicate_version(log, p, p.active_version, "Copy")
    assert len(copy.scenes) == 1
    assert copy.scenes[0] != "scene-1"
    assert p.scenes[copy.scenes[0]].shots == ["shot-1", "shot-2"]  # shared refs
    # editing the copy leaves the original untouched
    log.apply(p, Mutation("set_scene_title", {"scene_id": copy.scenes[0], "value": "changed"}))
    assert p.scenes["scene-1"].title == "One"


def test_duplicate_empty_version():
    p, log = fresh()
    p.versions[0].scenes.clear()
    p.scenes.clear()
    copy = duplicate_version(log, p, p.active_version, "Copy")
    assert copy.scenes == []


def test_undo_redo_round_trip():
    p, log = fresh()
    before = project_state_json(p)
    log.apply(p, Mutation("set_scene_title", {"scene_id": "scene-1", "value": "A"}))
    log.apply(p, Mutation("set_scene_title", {"scene_id": "scene-1", "value": "B"}))
    after = project_state_json(p)
    log.undo(p)
    log.undo(p)
    assert project_state_json(p) == before
    log.redo(p)
    log.redo(p)
    assert project_state_json(p) == after


def test_event_log_replay_restores_undo_stack():
    p, log = fresh()
    log.apply(p, Mutation("set_scene_title", {"scene_id": "scene-1", "value": "A"}))
    log.apply(p, Mutation("set_story_context", {"text": "notes"}))
    log.undo(p)
    replayed = MutationLog.from_lines(log.to_lines())
    assert replayed.revision == log.revision
    assert replayed.can_undo() and replayed.can_redo()
    replayed.undo(p)
    assert p.scenes["scene-1"].title == "One"


def test_set_scene_script_clears_stale_correspondences_and_undoes():
    from storyweave.model import Correspondence

    p, log = fresh()
    scene = p.scenes["scene-1"]
    scene.script = "x" * 40
    scene.correspondences = [Correspondence("shot-1", (0, 40))]
    before = project_state_json(p)
    log.apply(p, Mutation("set_scene_script", {"scene_id": "scene-1", "value": "short"}))
    assert scene.correspondences == []
    log.undo(p)
    assert project_state_json(p) == before


# ---------------------------------------------------------------------------
# Randomized soundness (the full-scale version runs in the acceptance suite)


def random_mutation(rng: random.Random, p) -> Mutation:
    choices = []
    scene_ids = list(p.scenes)
    shot_ids = list(p.shots)
    choices.append(Mutation("set_story_context", {"text": f"ctx-{rng.randint(0, 999)}"}))
    if scene_ids:
        sid = rng.choice(scene_ids)
        choices.append(Mutation("set_scene_title", {"scene_id": sid, "value": f"t{rng.randint(0, 99)}"}))
        choices.append(Mutation("set_scene_description", {"scene_id": sid, "value": f"d{rng.randint(0, 99)}"}))
        shots = list(p.scenes[sid].shots)
        if shots:
            rng.shuffle(shots)
            choices.append(Mutation("reorder_shots", {"scene_id": sid, "order": shots}))
    if shot_ids:
        shot = rng.choice(shot_ids)
        choices.append(Mutation("set_shot_description", {"shot_id": shot, "value": f"s{rng.randint(0, 99)}"}))
        choices.append(
            Mutation("set_shot_canvas_pos", {"shot_id": shot, "value": [rng.randint(0, 500), rng.randint(0, 500)]})
        )
    version = p.versions[0]
    if len(version.scenes) > 1:
        order = list(version.scenes)
        rng.shuffle(order)
        choices.append(Mutation("reorder_scenes", {"version_id": version.version_id, "order": order}))
    if scene_ids and rng.random() < 0.2:
        from storyweave.mutations import build_delete_scene

        return build_delete_scene(p, version.version_id, rng.choice(version.scenes)) if version.scenes else rng.choice(choices)
    return rng.choice(choices)


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=60, deadline=None)
def test_random_sequences_keep_integrity_and_undo_exactly(seed):
    rng = random.Random(seed)
    p = tiny_project()
    log = MutationLog()
    initial = project_state_json(p)
    steps = rng.randint(1, 12)
    applied = 0
    for _ in range(steps):
        try:
            log.apply(p, random_mutation(rng, p))
            applied += 1
        except (InvariantViolation, UnknownId):
            pass  # rejected mutations must leave state untouched; undo count unaffected
        validate_project(p)
    for _ in range(applied):
        log.undo(p)
    assert project_state_json(p) == initial
