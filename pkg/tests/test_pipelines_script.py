import json

import pytest

from storyweave import pipelines as pl
from storyweave.errors import CountViolation, DistinctnessViolation, InvariantViolation
from storyweave.model import SUGGESTION_CATEGORIES
from storyweave.mutations import Mutation

from .test_pipelines_story import scripted_session


def test_story_suggestion_count_in_range(described):
    suggestions = pl.generate_story_suggestions(described)
    assert 3 <= len(suggestions) <= 5
    for s in suggestions:
        assert s.level == "story"
        assert s.category in SUGGESTION_CATEGORIES
        assert s.explanation
        assert 1 <= len(s.tips) <= 2
        assert s.status == "active"
    # stored on the project
    assert len(described.project.suggestions) == len(suggestions)


def test_story_suggestions_need_described_shots(loaded):
    with pytest.raises(InvariantViolation):
        pl.generate_story_suggestions(loaded)


def test_story_suggestions_respect_category_filter(described):
    suggestions = pl.generate_story_suggestions(described, category="pacing")
    assert all(s.category == "pacing" for s in suggestions)


def test_unknown_category_rejected(described):
    with pytest.raises(InvariantViolation):
        pl.generate_story_suggestions(described, category="vibes")


def test_scene_suggestion_count_and_relevant_ids(multi_scene):
    scene_id = multi_scene.project.active().scenes[0]
    suggestions = pl.generate_scene_suggestions(multi_scene, scene_id)
    scene_shots = set(multi_scene.project.scene(scene_id).shots)
    assert 1 <= len(suggestions) <= 2
    for s in suggestions:
        assert s.level == "scene"
        assert s.scene_id == scene_id
        assert set(s.relevant_shot_ids) <= scene_shots
        assert 1 <= len(s.tips) <= 2


def test_scene_suggestions_for_empty_scene(multi_scene):
    proposal = pl.NewSceneProposal(title="Empty", description="d", insert_index=0)
    scene = pl.accept_scene_proposal(multi_scene, proposal)
    suggestions = pl.generate_scene_suggestions(multi_scene, scene.scene_id)
    assert all(s.relevant_shot_ids == [] for s in suggestions)


def test_disliked_text_excluded_by_post_filter(described):
    # scripted provider insists on returning a disliked text; the pipeline
    # must filter it and repair up to the count contract
    described.apply(Mutation("add_disliked", {"text": "What about the weather?"}))
    poisoned = {
        "suggestions": [
            {"category": "other", "text": "What about the weather?", "explanation": "e", "tips": ["t"]},
            {"category": "other", "text": "Q2?", "explanation": "e", "tips": ["t"]},
            {"category": "other", "text": "Q3?", "explanation": "e", "tips": ["t"]},
        ]
    }
    session = scripted_session(described, [json.dumps(poisoned)])
    suggestions = pl.generate_story_suggestions(session)
    texts = [s.text for s in suggestions]
    assert "What about the weather?" not in texts
    assert len(suggestions) >= 3


def test_persistent_undercount_raises_count_violation(described):
    described.apply(Mutation("add_disliked", {"text": "Qd?"}))
    poisoned = json.dumps(
        {
            "suggestions": [
                {"category": "other", "text": "Qd?", "explanation": "e", "tips": ["t"]},
                {"category": "other", "text": "Q2?", "explanation": "e", "tips": ["t"]},
                {"category": "other", "text": "Q3?", "explanation": "e", "tips": ["t"]},
            ]
        }
    )
    session = scripted_session(described, [poisoned, poisoned, poisoned])
    with pytest.raises(CountViolation):
        pl.generate_story_suggestions(session)


def test_dislike_suggestion_records_text_and_status(described):
    suggestions = pl.generate_story_suggestions(described)
    target = suggestions[0]
    pl.dislike_suggestion(described, target.suggestion_id)
    stored = next(s for s in described.project.suggestions if s.suggestion_id == target.suggestion_id)
    assert stored.status == "disliked"
    assert target.text in described.project.disliked_suggestions


# -- notes sync


def notes_session(multi_scene, text):
    multi_scene.apply(Mutation("set_story_context", {"text": text}))
    return multi_scene


def test_sync_three_sentences_three_scenes(multi_scene):
    session = notes_session(multi_scene, "First we arrived. Then we cooked. Finally we rested.")
    segments = pl.sync_notes_to_script(session)
    assert len(segments) == 3
    assert all(text for text in segments.values())
    joined = " ".join(segments[sid] for sid in session.project.active().scenes)
    assert joined == "First we arrived. Then we cooked. Finally we rested."


def test_sync_empty_notes_rejected(multi_scene):
    with pytest.raises(InvariantViolation):
        pl.sync_notes_to_script(multi_scene)


def test_sync_single_scene_gets_all_notes(described):
    from .conftest import make_scenes

    make_scenes(described, [len(described.project.shots)])
    session = notes_session(described, "One long reflection on the trip.")
    segments = pl.sync_notes_to_script(session)
    assert list(segments.values()) == ["One long reflection on the trip."]


def test_sync_never_overwrites_user_script_without_confirm(multi_scene):
    scene_id = multi_scene.project.active().scenes[0]
    multi_scene.apply(Mutation("set_scene_script", {"scene_id": scene_id, "value": "MY OWN WORDS"}))
    session = notes_session(multi_scene, "Alpha. Beta. Gamma.")
    pl.sync_notes_to_script(session, confirm=False)
    assert session.project.scene(scene_id).script == "MY OWN WORDS"
    pl.sync_notes_to_script(session, confirm=True)
    assert session.project.scene(scene_id).script != "MY OWN WORDS"


# -- refinement


def test_refine_returns_three_distinct_options(described):
    options = pl.refine_text(described, "We watched the tide come in.")
    assert len(options) == 3
    assert len(set(options)) == 3


def test_refine_empty_original_rejected(described):
    with pytest.raises(InvariantViolation):
        pl.refine_text(described, "   ")


def test_refine_collapsed_options_raise_distinctness_violation(described):
    dup = json.dumps({"options": ["same", "same", "different"]})
    session = scripted_session(described, [dup, dup, dup])
    with pytest.raises(DistinctnessViolation):
        pl.refine_text(session, "original line")
