"""Visual expansion pipelines: in-scene sequencing with shot proposals, the
two-stage contextual-shot generation (keyframe ideation then image calls),
image variations, and keyframe-to-video animation.

The clean-keyframe rule lives here: when annotations are present they are
sent only to the language model for prompt augmentation; the video model
always receives the unannotated keyframe.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .. import tasks
from ..config import CREATIVITY_IDEATION
from ..errors import (
    EmptyScene,
    InvariantViolation,
    PartialFailure,
    PermutationViolation,
)
from ..model import GenerationProvenance, Shot
from ..mutations import Mutation, batch, plan_ids
from ..providers.base import ImageGenRequest, Part, VideoGenRequest
from ..session import Session
from . import base
from .base import STRING, arr, fan_out, id_array, obj, run_structured


@dataclass
class ShotProposal:
    """A pending generated shot: three keyframe candidates for one slot."""

    scene_id: str
    slot: int
    image_prompt: str
    candidates: list[str]  # exactly 3 asset ids
    descriptions: list[str]  # per candidate
    explanation: str
    job_id: str = ""
    neighbor_shots: Optional[tuple[Optional[str], Optional[str]]] = None
    chosen: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "scene_id": self.scene_id,
            "slot": self.slot,
            "image_prompt": self.image_prompt,
            "candidates": list(self.candidates),
            "descriptions": list(self.descriptions),
            "explanation": self.explanation,
            "job_id": self.job_id,
            "neighbor_shots": list(self.neighbor_shots) if self.neighbor_shots else None,
            "chosen": self.chosen,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ShotProposal":
        neighbors = data.get("neighbor_shots")
        return cls(
            scene_id=data["scene_id"],
            slot=data["slot"],
            image_prompt=data["image_prompt"],
            candidates=list(data["candidates"]),
            descriptions=list(data["descriptions"]),
            explanation=data["explanation"],
            job_id=data.get("job_id", ""),
            neighbor_shots=tuple(neighbors) if neighbors else None,
            chosen=data.get("chosen"),
        )


@dataclass
class VisualSequenceResult:
    scene_id: str
    order: list[str]
    proposals: list[ShotProposal] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "scene_id": self.scene_id,
            "order": list(self.order),
            "proposals": [p.to_dict() for p in self.proposals],
        }


def sequence_visuals_in_scene(session: Session, scene_id: str) -> VisualSequenceResult:
    """Reorder a scene's shots and propose new generated shots at slots;
    each proposal's three keyframe candidates are generated fan-out."""
    project = session.project
    scene = project.scene(scene_id)
    if not scene.shots:
        raise EmptyScene(f"scene {scene_id} has no shots to sequence")
    undescribed = [sid for sid in scene.shots if not project.shot(sid).description]
    if undescribed:
        raise InvariantViolation("described-shots", f"shots must be described first: {undescribed}")

    shot_ids = list(scene.shots)
    schema = obj(
        tasks.VISUAL_SEQUENCE,
        {
            "order": id_array(shot_ids),
            "proposals": arr(
                obj(
                    None,
                    {
                        "index": {"type": "integer", "minimum": 0, "maximum": len(shot_ids)},
                        "image_prompt": STRING,
                        "description": STRING,
                        "explanation": STRING,
                    },
                ),
                min_items=0,
                max_items=2,
            ),
        },
    )
    from .. import prompts

    value, prompt = run_structured(
        session,
        schema=schema,
        template="visual_sequence",
        template_vars={
            "scene_title": scene.title,
            "scene_description": scene.description or "(no description)",
            "shot_catalog": base.shot_catalog(project, shot_ids),
            "script_block": prompts.block("SCRIPT", scene.script or "(empty)"),
            "story_context": project.story_context or "(none yet)",
        },
        creativity=CREATIVITY_IDEATION,
        check=lambda v: base.check_permutation(shot_ids, v["order"]),
        exhausted=lambda problem: PermutationViolation(f"shot order invalid after repairs: {problem}"),
    )
    if value["order"] != shot_ids:
        session.apply(Mutation("reorder_shots", {"scene_id": scene_id, "order": value["order"]}))

    job = session.store.new_job(
        "sequence_visuals",
        prompts={"user": prompt},
        intermediates={"proposals": value["proposals"]},
        extra={"scene_id": scene_id},
        status="running",
    )

    # fan out 3 keyframe candidates per proposal
    calls = []
    for p in value["proposals"]:
        for i in range(3):
            calls.append(
                lambda prompt_text=p["image_prompt"], i=i: session.hub.generate_image(
                    ImageGenRequest(prompt=prompt_text, n=1, seed=i)
                )
            )
    results, errors = fan_out(calls)
    survivors = [r.outputs[0] for r in results if r is not None]
    if errors:
        session.store.update_job(job.job_id, status="failed", error=str(errors[0]))
        if survivors:
            raise PartialFailure(
                f"{len(errors)} keyframe candidates failed", outputs=survivors, errors=[str(e) for e in errors]
            )
        raise errors[0]

    proposals = []
    order = list(value["order"])
    for k, p in enumerate(value["proposals"]):
        candidates = survivors[k * 3 : k * 3 + 3]
        slot = max(0, min(p["index"], len(order)))
        prev_id = order[slot - 1] if slot > 0 else None
        next_id = order[slot] if slot < len(order) else None
        proposals.append(
            ShotProposal(
                scene_id=scene_id,
                slot=slot,
                image_prompt=p["image_prompt"],
                candidates=candidates,
                descriptions=[p["description"]] * 3,
                explanation=p["explanation"],
                job_id=job.job_id,
                neighbor_shots=(prev_id, next_id),
            )
        )
    session.store.update_job(job.job_id, status="done", output_asset_ids=survivors)
    return VisualSequenceResult(scene_id=scene_id, order=order, proposals=proposals)


def add_contextual_shot(
    session: Session,
    scene_id: str,
    prev_shot_id: Optional[str] = None,
    next_shot_id: Optional[str] = None,
    user_prompt: Optional[str] = None,
) -> ShotProposal:
    """Two-stage contextual shot: ideate three image prompts from the
    neighbors and story context, then generate the three keyframe
    candidates concurrently with the neighbor frames attached."""
    project = session.project
    scene = project.scene(scene_id)
    if prev_shot_id is None and next_shot_id is None:
        raise InvariantViolation("neighbor-required", "at least one neighboring shot is required")
    for sid in (prev_shot_id, next_shot_id):
        if sid is not None and sid not in scene.shots:
            raise InvariantViolation("neighbor-in-scene", f"shot {sid} is not in scene {scene_id}")

    neighbor_lines = []
    if prev_shot_id:
        neighbor_lines.append(f"Previous shot: {base.shot_line(project, prev_shot_id)}")
    if next_shot_id:
        neighbor_lines.append(f"Next shot: {base.shot_line(project, next_shot_id)}")
    images = base.neighbor_images(session, [prev_shot_id, next_shot_id])

    from .. import prompts

    schema = obj(
        tasks.SHOT_IDEAS,
        {
            "ideas": arr(
                obj(None, {"image_prompt": STRING, "description": STRING, "explanation": STRING}),
                min_items=3,
                max_items=3,
            )
        },
    )
    value, prompt = run_structured(
        session,
        schema=schema,
        template="contextual_shot_ideas",
        template_vars={
            "user_prompt": user_prompt or "(none)",
            "neighbor_block": "\n".join(neighbor_lines),
            "scene_title": scene.title,
            "scene_description": scene.description or "(no description)",
            "script_block": prompts.block("SCRIPT", scene.script or "(empty)"),
            "story_context": project.story_context or "(none yet)",
        },
        images=images,
        creativity=CREATIVITY_IDEATION,
    )
    ideas = value["ideas"]
    job = session.store.new_job(
        "add_contextual_shot",
        status="running",
        prompts={"user": prompt},
        # the three image-generation prompts are first-class audit artifacts
        intermediates={"image_prompts": [i["image_prompt"] for i in ideas], "ideas": ideas},
        extra={"scene_id": scene_id, "prev": prev_shot_id, "next": next_shot_id},
    )

    calls = [
        lambda idea=idea, i=i: session.hub.generate_image(
            ImageGenRequest(prompt=idea["image_prompt"], n=1, seed=i)
        )
        for i, idea in enumerate(ideas)
    ]
    results, errors = fan_out(calls)
    survivors = [r.outputs[0] for r in results if r is not None]
    if errors:
        session.store.update_job(job.job_id, status="failed", error=str(errors[0]))
        if survivors:
            raise PartialFailure(
                f"{len(errors)} of 3 keyframe candidates failed",
                outputs=survivors,
                errors=[str(e) for e in errors],
            )
        raise errors[0]
    session.store.update_job(job.job_id, status="done", output_asset_ids=survivors)

    if next_shot_id is not None:
        slot = scene.shots.index(next_shot_id)
    else:
        slot = scene.shots.index(prev_shot_id) + 1
    return ShotProposal(
        scene_id=scene_id,
        slot=slot,
        image_prompt=ideas[0]["image_prompt"],
        candidates=survivors,
        descriptions=[i["description"] for i in ideas],
        explanation=" | ".join(i["explanation"] for i in ideas),
        job_id=job.job_id,
        neighbor_shots=(prev_shot_id, next_shot_id),
    )


def accept_shot_proposal(session: Session, proposal: ShotProposal, chosen: int = 0) -> Shot:
    """Materialize one candidate as a generated shot at the proposal slot."""
    project = session.project
    scene = project.scene(proposal.scene_id)
    if not 0 <= chosen < len(proposal.candidates):
        raise InvariantViolation("chosen-range", f"candidate index {chosen} out of range")
    asset_id = proposal.candidates[chosen]
    project.asset(asset_id)

    (shot_id,), seq_step = plan_ids(project, ["shot"])
    pos = _slot_canvas_pos(session, scene, proposal.slot)
    shot = Shot(
        shot_id=shot_id,
        asset_id=asset_id,
        provenance="generated",
        description=proposal.descriptions[chosen],
        canvas_pos=pos,
        generation=GenerationProvenance(
            job_id=proposal.job_id,
            source_prompt=proposal.image_prompt,
            explanation=proposal.explanation,
            neighbor_shots=proposal.neighbor_shots,
        ),
    )
    steps = [
        seq_step,
        Mutation("create_shot", {"shot": shot.to_dict()}),
        Mutation(
            "insert_shot_ref",
            {"scene_id": proposal.scene_id, "shot_id": shot_id, "index": proposal.slot},
        ),
    ]
    if not scene.shots:
        steps.append(Mutation("set_scene_keyframe", {"scene_id": proposal.scene_id, "value": shot_id}))
    session.apply(batch(steps))
    proposal.chosen = chosen
    return project.shot(shot_id)


def _slot_canvas_pos(session: Session, scene, slot: int) -> tuple[float, float]:
    project = session.project
    positions = [project.shot(sid).canvas_pos for sid in scene.shots]
    if not positions:
        return (0.0, 0.0)
    left = positions[slot - 1] if slot > 0 else None
    right = positions[slot] if slot < len(positions) else None
    if left and right:
        return ((left[0] + right[0]) / 2, (left[1] + right[1]) / 2)
    anchor = left or right
    return (anchor[0] + (90.0 if left else -90.0), anchor[1])


# ---------------------------------------------------------------------------
# Image variations


@dataclass
class ImageVariationResult:
    shot_id: str
    base_asset_id: str
    candidates: list[str]
    descriptions: list[str]
    explanations: list[str]
    job_id: str

    def to_dict(self) -> dict:
        return {
            "shot_id": self.shot_id,
            "base_asset_id": self.base_asset_id,
            "candidates": list(self.candidates),
            "descriptions": list(self.descriptions),
            "explanations": list(self.explanations),
            "job_id": self.job_id,
        }


def generate_image_variations(
    session: Session, shot_id: str, user_prompt: Optional[str] = None, n: int = 3
) -> ImageVariationResult:
    """n edited variants of a shot's image (first frame for video shots)."""
    if n < 1:
        raise InvariantViolation("n-positive", f"requested {n} variants; need at least 1")
    project = session.project
    shot = project.shot(shot_id)
    base_asset = project.asset(shot.asset_id)

    schema = obj(
        tasks.IMAGE_VARIATION_IDEAS,
        {
            "ideas": arr(
                obj(None, {"edit_prompt": STRING, "description": STRING, "explanation": STRING}),
                min_items=n,
                max_items=n,
            )
        },
    )
    value, prompt = run_structured(
        session,
        schema=schema,
        template="image_variation_ideas",
        template_vars={
            "n": n,
            "user_prompt": user_prompt or "(explore different treatments)",
            "base_description": shot.description or f"(undescribed {base_asset.kind})",
        },
        images=[Part.of_image(base_asset.asset_id, frame_time_s=0.0 if base_asset.kind == "video" else None)],
        creativity=CREATIVITY_IDEATION,
    )
    ideas = value["ideas"]
    job = session.store.new_job(
        "image_variations",
        status="running",
        prompts={"user": prompt},
        intermediates={"edit_prompts": [i["edit_prompt"] for i in ideas]},
        extra={"shot_id": shot_id},
    )
    calls = [
        lambda idea=idea, i=i: session.hub.generate_image(
            ImageGenRequest(prompt=idea["edit_prompt"], n=1, seed=i, base_image=base_asset.asset_id)
        )
        for i, idea in enumerate(ideas)
    ]
    results, errors = fan_out(calls)
    survivors = [r.outputs[0] for r in results if r is not None]
    if errors:
        session.store.update_job(job.job_id, status="failed", error=str(errors[0]))
        if survivors:
            raise PartialFailure(
                f"{len(errors)} of {n} variants failed", outputs=survivors, errors=[str(e) for e in errors]
            )
        raise errors[0]
    session.store.update_job(job.job_id, status="done", output_asset_ids=survivors)
    return ImageVariationResult(
        shot_id=shot_id,
        base_asset_id=base_asset.asset_id,
        candidates=survivors,
        descriptions=[i["description"] for i in ideas],
        explanations=[i["explanation"] for i in ideas],
        job_id=job.job_id,
    )


def select_image_variation(session: Session, result: ImageVariationResult, chosen: int) -> Shot:
    """Swap the chosen variant in.  Generated shots swap in place (shot_id
    preserved, prior asset retained in the registry); captured shots are
    replaced by a new generated shot so provenance never flips."""
    project = session.project
    if not 0 <= chosen < len(result.candidates):
        raise InvariantViolation("chosen-range", f"candidate index {chosen} out of range")
    shot = project.shot(result.shot_id)
    asset_id = result.candidates[chosen]
    provenance = GenerationProvenance(
        job_id=result.job_id,
        source_prompt=f"variation of {result.base_asset_id}",
        explanation=result.explanations[chosen],
        base_keyframe=result.base_asset_id,
    )
    if shot.provenance == "generated":
        session.apply(
            batch(
                [
                    Mutation("set_shot_asset", {"shot_id": shot.shot_id, "asset_id": asset_id}),
                    Mutation("set_shot_generation", {"shot_id": shot.shot_id, "value": provenance.to_dict()}),
                    Mutation("set_shot_description", {"shot_id": shot.shot_id, "value": result.descriptions[chosen]}),
                ]
            )
        )
        return project.shot(shot.shot_id)
    return _replace_with_generated(session, shot, asset_id, result.descriptions[chosen], provenance)


def _replace_with_generated(
    session: Session, original: Shot, asset_id: str, description: str, provenance: GenerationProvenance
) -> Shot:
    """Swap a captured shot out of its scene for a new generated shot; the
    original returns to the loose pool untouched."""
    project = session.project
    (shot_id,), seq_step = plan_ids(project, ["shot"])
    new_shot = Shot(
        shot_id=shot_id,
        asset_id=asset_id,
        provenance="generated",
        description=description,
        canvas_pos=original.canvas_pos,
        generation=provenance,
    )
    steps = [seq_step, Mutation("create_shot", {"shot": new_shot.to_dict()})]
    scene = project.scene_of_shot(original.shot_id)
    if scene is not None:
        index = scene.shots.index(original.shot_id)
        steps.append(Mutation("remove_shot_ref", {"scene_id": scene.scene_id, "shot_id": original.shot_id}))
        steps.append(Mutation("insert_shot_ref", {"scene_id": scene.scene_id, "shot_id": shot_id, "index": index}))
        if scene.keyframe_shot == original.shot_id:
            steps.append(Mutation("set_scene_keyframe", {"scene_id": scene.scene_id, "value": shot_id}))
    session.apply(batch(steps))
    return project.shot(shot_id)


# ---------------------------------------------------------------------------
# Video prompt suggestion and keyframe animation


def suggest_video_prompt(
    session: Session, shot_id: str, annotation_asset_id: Optional[str] = None
) -> dict[str, str]:
    """Auto-fill the structured video-prompt fields from the keyframe (and
    annotations when present)."""
    project = session.project
    shot = project.shot(shot_id)
    images = [Part.of_image(shot.asset_id)]
    if annotation_asset_id is not None:
        project.asset(annotation_asset_id)
        images.append(Part.of_image(annotation_asset_id))
    schema = obj(
        tasks.VIDEO_PROMPT_FIELDS,
        {"camera_movement": STRING, "lighting": STRING, "style": STRING, "action": STRING},
    )
    value, prompt = run_structured(
        session,
        schema=schema,
        template="video_prompt_fields",
        template_vars={"base_description": shot.description or "(undescribed)"},
        images=images,
        creativity=CREATIVITY_IDEATION,
    )
    session.store.new_job("video_prompt_fields", status="done", prompts={"user": prompt}, extra={"shot_id": shot_id})
    return value


@dataclass
class VideoVariationResult:
    shot_id: str
    keyframe_asset_id: str
    augmented_prompt: str
    candidates: list[str]
    job_id: str

    def to_dict(self) -> dict:
        return {
            "shot_id": self.shot_id,
            "keyframe_asset_id": self.keyframe_asset_id,
            "augmented_prompt": self.augmented_prompt,
            "candidates": list(self.candidates),
            "job_id": self.job_id,
        }


def generate_video_variations(
    session: Session,
    shot_id: str,
    annotation_asset_id: Optional[str] = None,
    user_prompt: Optional[str] = None,
    n: int = 2,
) -> VideoVariationResult:
    """Animate a keyframe into n video variants.

    Stage 1 sends the flattened annotated raster (when present) with the
    creator's prompt to the language model to produce one augmented video
    prompt.  Stage 2 sends the CLEAN keyframe plus that augmented prompt to
    the video model; the annotated raster never reaches it.
    """
    if n < 1:
        raise InvariantViolation("n-positive", f"requested {n} variants; need at least 1")
    project = session.project
    shot = project.shot(shot_id)
    keyframe = project.asset(shot.asset_id)
    if keyframe.kind != "image":
        raise InvariantViolation("image-base", f"shot {shot_id} is not backed by a still image")
    if annotation_asset_id is not None:
        project.asset(annotation_asset_id)

    annotation_note = (
        "An annotated copy of the keyframe is attached; fold the marked story elements into the prompt."
        if annotation_asset_id
        else "(no annotations)"
    )
    images = [Part.of_image(annotation_asset_id or keyframe.asset_id)]
    schema = obj(tasks.AUGMENTED_VIDEO_PROMPT, {"prompt": STRING})
    value, prompt = run_structured(
        session,
        schema=schema,
        template="augmented_video_prompt",
        template_vars={
            "user_prompt": user_prompt or "(none)",
            "base_description": shot.description or "(undescribed keyframe)",
            "annotation_note": annotation_note,
        },
        images=images,
        creativity=CREATIVITY_IDEATION,
    )
    augmented = value["prompt"]
    job = session.store.new_job(
        "video_variations",
        status="running",
        prompts={"user": prompt},
        intermediates={"augmented_prompt": augmented},
        extra={"shot_id": shot_id, "annotated": annotation_asset_id},
    )

    calls = [
        lambda i=i: session.hub.generate_video(
            VideoGenRequest(prompt=augmented, keyframe=keyframe.asset_id, n=1, seed=i)
        )
        for i in range(n)
    ]
    results, errors = fan_out(calls)
    survivors = [r.outputs[0] for r in results if r is not None]
    if errors:
        session.store.update_job(job.job_id, status="failed", error=str(errors[0]))
        if survivors:
            raise PartialFailure(
                f"{len(errors)} of {n} video variants failed",
                outputs=survivors,
                errors=[str(e) for e in errors],
            )
        raise errors[0]
    session.store.update_job(job.job_id, status="done", output_asset_ids=survivors)
    return VideoVariationResult(
        shot_id=shot_id,
        keyframe_asset_id=keyframe.asset_id,
        augmented_prompt=augmented,
        candidates=survivors,
        job_id=job.job_id,
    )


def apply_video_variation(session: Session, result: VideoVariationResult, chosen: int = 0) -> Shot:
    """Turn the chosen variant into the scene's shot.  Generated image shots
    update in place; captured shots are replaced by a new generated shot."""
    project = session.project
    if not 0 <= chosen < len(result.candidates):
        raise InvariantViolation("chosen-range", f"candidate index {chosen} out of range")
    shot = project.shot(result.shot_id)
    asset_id = result.candidates[chosen]
    provenance = GenerationProvenance(
        job_id=result.job_id,
        source_prompt=result.augmented_prompt,
        explanation="animated from keyframe",
        base_keyframe=result.keyframe_asset_id,
    )
    if shot.provenance == "generated":
        session.apply(
            batch(
                [
                    Mutation("set_shot_asset", {"shot_id": shot.shot_id, "asset_id": asset_id}),
                    Mutation("set_shot_generation", {"shot_id": shot.shot_id, "value": provenance.to_dict()}),
                ]
            )
        )
        return project.shot(shot.shot_id)
    return _replace_with_generated(
        session, shot, asset_id, shot.description or "animated shot", provenance
    )
