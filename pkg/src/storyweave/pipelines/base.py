"""Shared pipeline machinery: prompt context, semantic repair, fan-out."""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Sequence

from .. import prompts
from ..config import CREATIVITY_IDEATION
from ..errors import PipelineError
from ..model import Project
from ..providers.base import Part, StructuredRequest
from ..session import Session

SEMANTIC_RETRIES = 2  # re-prompts after a semantically invalid (id-dropping) response


def run_structured(
    session: Session,
    *,
    schema: dict,
    template: str,
    template_vars: dict,
    images: Sequence[Part] = (),
    creativity: float = CREATIVITY_IDEATION,
    check: Optional[Callable[[dict], Optional[str]]] = None,
    exhausted: Optional[Callable[[str], PipelineError]] = None,
) -> tuple[dict, str]:
    """Render the template, run the structured call, and enforce semantic
    contracts (id conservation, counts) with a bounded repair loop.

    ``check`` returns a problem description or None; after
    ``SEMANTIC_RETRIES`` failed repairs the ``exhausted`` factory's error is
    raised.  Returns (value, rendered prompt text) so callers can audit the
    prompt into the job log.
    """
    prompt_text = prompts.render(template, **template_vars)
    req = StructuredRequest(
        system_prompt=prompts.system_prompt(session.config),
        user_parts=[Part.of_text(prompt_text), *images],
        schema=schema,
        creativity=creativity,
    )
    attempts = 0
    while True:
        result = session.hub.complete_structured(req)
        problem = check(result.value) if check else None
        if problem is None:
            return result.value, prompt_text
        attempts += 1
        if attempts > SEMANTIC_RETRIES:
            if exhausted is None:
                raise PipelineError(f"structured response failed semantic checks: {problem}")
            raise exhausted(problem)
        req = dataclasses.replace(
            req,
            user_parts=[
                *req.user_parts,
                Part.of_text(f"Problem with your previous response: {problem}. Fix it and answer again."),
            ],
        )


def fan_out(calls: Sequence[Callable[[], object]]) -> tuple[list, list[Exception]]:
    """Run calls concurrently (the provider hub's semaphore bounds real
    parallelism); results keep submission order, failures slot None."""
    if not calls:
        return [], []
    results: list = [None] * len(calls)
    errors: list[Exception] = []
    with ThreadPoolExecutor(max_workers=len(calls)) as pool:
        futures = [pool.submit(call) for call in calls]
        for i, future in enumerate(futures):
            try:
                results[i] = future.result()
            except Exception as exc:  # collected, not raised: partial results survive
                errors.append(exc)
    return results, errors


# -- semantic contract checks


def check_permutation(expected: Sequence[str], got: Sequence[str]) -> Optional[str]:
    missing = set(expected) - set(got)
    extra = set(got) - set(expected)
    if missing or extra or len(got) != len(expected):
        return (
            f"the order must be a permutation of the given ids; "
            f"missing={sorted(missing)} invented_or_duplicated={sorted(extra) or _dupes(got)}"
        )
    return None


def check_partition(expected: Sequence[str], groups: Sequence[Sequence[str]]) -> Optional[str]:
    flat = [sid for group in groups for sid in group]
    missing = set(expected) - set(flat)
    extra = set(flat) - set(expected)
    if missing:
        return f"these ids were dropped: {sorted(missing)}"
    if extra:
        return f"these ids do not exist: {sorted(extra)}"
    if len(flat) != len(set(flat)):
        return f"these ids appear more than once: {_dupes(flat)}"
    if any(not group for group in groups):
        return "empty scenes are not allowed"
    return None


def check_subset(expected: Sequence[str], groups: Sequence[Sequence[str]]) -> Optional[str]:
    flat = [sid for group in groups for sid in group]
    extra = set(flat) - set(expected)
    if extra:
        return f"these ids do not exist: {sorted(extra)}"
    if len(flat) != len(set(flat)):
        return f"these ids appear more than once: {_dupes(flat)}"
    if any(not group for group in groups):
        return "empty scenes are not allowed"
    return None


def _dupes(ids: Sequence[str]) -> list[str]:
    seen: set[str] = set()
    out = []
    for sid in ids:
        if sid in seen and sid not in out:
            out.append(sid)
        seen.add(sid)
    return out


# -- prompt context rendering


def shot_line(project: Project, shot_id: str) -> str:
    shot = project.shot(shot_id)
    asset = project.asset(shot.asset_id)
    desc = shot.description or "(undescribed)"
    return f"- {shot_id} [{asset.kind}, {shot.provenance}]: {desc}"


def shot_catalog(project: Project, shot_ids: Sequence[str]) -> str:
    return "\n".join(shot_line(project, sid) for sid in shot_ids) or "(none)"


def scene_line(project: Project, scene_id: str) -> str:
    scene = project.scene(scene_id)
    return f"- {scene_id} \"{scene.title}\": {scene.description or '(no description)'}"


def scene_catalog(project: Project, scene_ids: Sequence[str]) -> str:
    return "\n".join(scene_line(project, sid) for sid in scene_ids) or "(none)"


def scene_block(project: Project, scene_ids: Sequence[str]) -> str:
    lines = []
    for scene_id in scene_ids:
        scene = project.scene(scene_id)
        lines.append(scene_line(project, scene_id))
        if scene.script:
            lines.append(f"  script: {scene.script}")
    return "\n".join(lines) or "(none)"


def disliked_block(disliked: Sequence[str]) -> str:
    if not disliked:
        return ""
    lines = "\n".join(f"- {text}" for text in disliked)
    return f"Avoid suggestions similar to these, which the creator disliked:\n{lines}"


def category_note(category: Optional[str]) -> str:
    return f"Focus on the narrative category: {category}." if category else ""


def neighbor_images(session: Session, shot_ids: Sequence[Optional[str]]) -> list[Part]:
    """Image parts for neighbor shots (video neighbors use their first frame);
    downscaled before inclusion to bound prompt size."""
    parts = []
    for shot_id in shot_ids:
        if shot_id is None:
            continue
        shot = session.project.shot(shot_id)
        asset = session.project.asset(shot.asset_id)
        frame = 0.0 if asset.kind == "video" else None
        parts.append(Part.of_image(shot.asset_id, frame_time_s=frame, max_edge=512))
    return parts


STRING = {"type": "string", "minLength": 1}
TEXT = {"type": "string"}  # may be empty


def id_array(ids: Sequence[str], *, min_items: int = 1, max_items: int | None = None) -> dict:
    # no uniqueItems / exact counts here: id conservation is checked
    # semantically so drops and duplicates go through the repair loop and
    # raise the contract-specific error, not a schema failure
    return {
        "type": "array",
        "minItems": min_items,
        "maxItems": max_items if max_items is not None else max(1, len(ids)),
        "items": {"type": "string", "enum": list(ids)},
    }


def obj(title: Optional[str], properties: dict, required: Optional[list[str]] = None) -> dict:
    schema = {
        "type": "object",
        "properties": properties,
        "required": required if required is not None else list(properties),
        "additionalProperties": False,
    }
    if title:
        schema["title"] = title
    return schema


def arr(items: dict, *, min_items: int = 1, max_items: int = 8) -> dict:
    return {"type": "array", "minItems": min_items, "maxItems": max_items, "items": items}
