"""Script-side pipelines: Socratic suggestions, notes-to-script sync, and
inline text refinement."""

from __future__ import annotations

from typing import Optional

from .. import prompts, tasks
from ..config import CREATIVITY_EXTRACTION, CREATIVITY_IDEATION
from ..errors import CountViolation, DistinctnessViolation, InvariantViolation, PipelineError
from ..model import SUGGESTION_CATEGORIES, Suggestion
from ..mutations import Mutation, batch, plan_ids
from ..session import Session
from . import base
from .base import STRING, TEXT, arr, obj, run_structured

STORY_SUGGESTION_RANGE = (3, 5)
SCENE_SUGGESTION_RANGE = (1, 2)


def _suggestion_item_schema(categories: list[str], shot_ids: Optional[list[str]]) -> dict:
    properties = {
        "category": {"type": "string", "enum": categories},
        "text": STRING,
        "explanation": STRING,
        "tips": arr(STRING, min_items=1, max_items=2),
    }
    if shot_ids is not None:
        if shot_ids:
            properties["relevant_shot_ids"] = {
                "type": "array",
                "minItems": 0,
                "maxItems": min(3, len(shot_ids)),
                "uniqueItems": True,
                "items": {"type": "string", "enum": shot_ids},
            }
        else:
            properties["relevant_shot_ids"] = {"type": "array", "maxItems": 0, "items": {"type": "string"}}
    return obj(None, properties)


def _suggestion_schema(task: str, count_range: tuple[int, int], categories, shot_ids=None) -> dict:
    low, high = count_range
    return obj(
        task,
        {
            "suggestions": {
                "type": "array",
                "minItems": low,
                "maxItems": high,
                "items": _suggestion_item_schema(categories, shot_ids),
            }
        },
    )


def _filtered(value: dict, disliked: list[str]) -> list[dict]:
    return [s for s in value["suggestions"] if s["text"] not in disliked]


def _store_suggestions(session: Session, raw: list[dict], level: str, scene_id: Optional[str]) -> list[Suggestion]:
    project = session.project
    ids, seq_step = plan_ids(project, ["suggestion"] * len(raw))
    steps = [seq_step]
    out = []
    for sid, item in zip(ids, raw):
        suggestion = Suggestion(
            suggestion_id=sid,
            level=level,
            category=item["category"],
            text=item["text"],
            explanation=item["explanation"],
            tips=list(item["tips"]),
            relevant_shot_ids=list(item.get("relevant_shot_ids", [])),
            scene_id=scene_id,
        )
        steps.append(Mutation("add_suggestion", {"suggestion": suggestion.to_dict()}))
        out.append(suggestion)
    session.apply(batch(steps))
    return out


def generate_story_suggestions(session: Session, category: Optional[str] = None) -> list[Suggestion]:
    """3-5 Socratic suggestions for the overall story."""
    return _generate_suggestions(session, level="story", scene_id=None, category=category)


def generate_scene_suggestions(session: Session, scene_id: str, category: Optional[str] = None) -> list[Suggestion]:
    """1-2 Socratic suggestions scoped to one scene, with relevant shot ids."""
    session.project.scene(scene_id)
    return _generate_suggestions(session, level="scene", scene_id=scene_id, category=category)


def _generate_suggestions(session: Session, level: str, scene_id: Optional[str], category: Optional[str]):
    project = session.project
    if category is not None and category not in SUGGESTION_CATEGORIES:
        raise InvariantViolation("category", f"unknown suggestion category {category!r}")
    categories = [category] if category else SUGGESTION_CATEGORIES
    disliked = list(project.disliked_suggestions)

    if level == "story":
        described = [sid for sid, shot in project.shots.items() if shot.description]
        if not described:
            raise InvariantViolation("described-shots", "story suggestions need at least one described shot")
        count_range = STORY_SUGGESTION_RANGE
        schema = _suggestion_schema(tasks.STORY_SUGGESTIONS, count_range, categories)
        template = "story_suggestions"
        template_vars = {
            "category_note": base.category_note(category),
            "disliked_block": base.disliked_block(disliked),
            "shot_catalog": base.shot_catalog(project, described),
            "scene_block": base.scene_block(project, project.active().scenes),
            "story_context": project.story_context or "(none yet)",
        }
    else:
        scene = project.scene(scene_id)
        count_range = SCENE_SUGGESTION_RANGE
        schema = _suggestion_schema(tasks.SCENE_SUGGESTIONS, count_range, categories, shot_ids=list(scene.shots))
        template = "scene_suggestions"
        template_vars = {
            "category_note": base.category_note(category),
            "disliked_block": base.disliked_block(disliked),
            "scene_title": scene.title,
            "scene_description": scene.description or "(no description)",
            "shot_catalog": base.shot_catalog(project, scene.shots),
            "script_block": prompts.block("SCRIPT", scene.script or "(empty)"),
            "story_context": project.story_context or "(none yet)",
        }

    def check(value: dict) -> Optional[str]:
        kept = _filtered(value, disliked)
        if len(kept) < count_range[0]:
            return (
                f"after removing disliked texts only {len(kept)} suggestions remain; "
                f"produce at least {count_range[0]} fresh ones"
            )
        return None

    value, prompt = run_structured(
        session,
        schema=schema,
        template=template,
        template_vars=template_vars,
        creativity=CREATIVITY_IDEATION,
        check=check,
        exhausted=lambda problem: CountViolation(f"suggestion count contract unmet after repairs: {problem}"),
    )
    kept = _filtered(value, disliked)[: count_range[1]]
    suggestions = _store_suggestions(session, kept, level, scene_id)
    session.store.new_job(
        f"{level}_suggestions",
        status="done",
        prompts={"user": prompt},
        extra={"suggestion_ids": [s.suggestion_id for s in suggestions]},
    )
    return suggestions


def dislike_suggestion(session: Session, suggestion_id: str) -> None:
    """Mark a suggestion disliked and remember its text for future exclusion."""
    suggestion = next(
        (s for s in session.project.suggestions if s.suggestion_id == suggestion_id), None
    )
    if suggestion is None:
        from ..errors import UnknownId

        raise UnknownId(f"unknown suggestion: {suggestion_id}")
    session.apply(
        batch(
            [
                Mutation("set_suggestion_status", {"suggestion_id": suggestion_id, "status": "disliked"}),
                Mutation("add_disliked", {"text": suggestion.text}),
            ]
        )
    )


def sync_notes_to_script(session: Session, confirm: bool = False) -> dict[str, str]:
    """Segment the editor notes into per-scene script text.

    Without ``confirm`` only scenes whose script is empty are written;
    with it, existing scripts are overwritten too.
    """
    project = session.project
    if not project.story_context.strip():
        raise InvariantViolation("nonempty-notes", "there are no notes to sync")
    scene_ids = list(project.active().scenes)
    if not scene_ids:
        raise InvariantViolation("nonempty-input", "the active version has no scenes")

    schema = obj(
        tasks.NOTES_SEGMENTATION,
        {
            "segments": {
                "type": "array",
                "minItems": len(scene_ids),
                "maxItems": len(scene_ids),
                "items": obj(
                    None,
                    {"scene_id": {"type": "string", "enum": scene_ids}, "text": TEXT},
                ),
            }
        },
    )

    value, prompt = run_structured(
        session,
        schema=schema,
        template="notes_segmentation",
        template_vars={
            "notes_block": prompts.block("NOTES", project.story_context),
            "scene_catalog": base.scene_catalog(project, scene_ids),
        },
        creativity=CREATIVITY_EXTRACTION,
        check=lambda v: base.check_permutation(scene_ids, [s["scene_id"] for s in v["segments"]]),
        exhausted=lambda problem: PipelineError(f"notes segmentation invalid after repairs: {problem}"),
    )
    by_scene = {seg["scene_id"]: seg["text"] for seg in value["segments"]}
    segments = {sid: by_scene.get(sid, "") for sid in scene_ids}

    steps = []
    for scene_id, text in segments.items():
        scene = project.scene(scene_id)
        if scene.script and not confirm:
            continue  # never overwrite user text without confirmation
        if scene.script != text:
            steps.append(Mutation("set_scene_script", {"scene_id": scene_id, "value": text}))
    if steps:
        session.apply(batch(steps))
    session.store.new_job("sync_notes", status="done", prompts={"user": prompt})
    return segments


def refine_text(session: Session, original: str, user_prompt: Optional[str] = None) -> list[str]:
    """Three distinct refined versions of a passage."""
    if not original.strip():
        raise InvariantViolation("nonempty-original", "cannot refine empty text")
    schema = obj(
        tasks.TEXT_REFINEMENT,
        {"options": arr(STRING, min_items=3, max_items=3)},
    )

    def check(value: dict) -> Optional[str]:
        if len(set(value["options"])) != 3:
            return "the three options must be distinct from each other"
        return None

    value, prompt = run_structured(
        session,
        schema=schema,
        template="text_refinement",
        template_vars={
            "user_prompt": user_prompt or "(keep the same intent, improve the telling)",
            "original_block": prompts.block("ORIGINAL", original),
        },
        creativity=CREATIVITY_IDEATION,
        check=check,
        exhausted=lambda problem: DistinctnessViolation(f"refinement options collapsed: {problem}"),
    )
    session.store.new_job("refine_text", status="done", prompts={"user": prompt})
    return list(value["options"])
