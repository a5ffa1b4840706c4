"""Story-structure pipelines: describing media, grouping shots into scenes,
sequencing, contextual scenes, variations, and version comparison."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .. import tasks
from ..config import CREATIVITY_EXTRACTION, CREATIVITY_IDEATION
from ..errors import (
    IncompleteGrouping,
    InvariantViolation,
    MediaProbeError,
    PermutationViolation,
    PipelineError,
    ProviderError,
    UnknownShotId,
)
from ..model import PALETTE, Scene, StoryVersion
from ..mutations import Mutation, batch, plan_ids
from ..providers.base import Part
from ..session import Session
from . import base
from .base import STRING, arr, id_array, obj, run_structured


# ---------------------------------------------------------------------------
# Shot and scene descriptions


def describe_shot(session: Session, shot_id: str, force: bool = False) -> str:
    """Produce (or reuse) a rich text description of one shot's media."""
    project = session.project
    shot = project.shot(shot_id)
    if shot.description and not force:
        return shot.description  # cache hit: no provider call
    asset = project.asset(shot.asset_id)
    path = session.store.asset_path(asset)
    if not path.exists():
        raise MediaProbeError(f"asset file missing for {shot_id}: {asset.uri}")

    if asset.kind == "video":
        duration = asset.duration_s or 0.0
        images = [Part.of_image(asset.asset_id, frame_time_s=t) for t in (0.0, duration / 2, duration)]
        media_note = "The attachments are the first, middle, and last frames of the video."
    else:
        images = [Part.of_image(asset.asset_id)]
        media_note = ""

    job = session.store.queued_describe_job(shot_id) or session.store.new_job(
        "describe_shot", extra={"shot_id": shot_id}
    )
    schema = obj(tasks.SHOT_DESCRIPTION, {"description": STRING})
    try:
        value, prompt = run_structured(
            session,
            schema=schema,
            template="shot_description",
            template_vars={
                "kind": asset.kind,
                "media_note": media_note,
                "story_context": project.story_context or "(none yet)",
            },
            images=images,
            creativity=CREATIVITY_EXTRACTION,
        )
    except ProviderError:
        session.store.update_job(job.job_id, status="queued")  # left undescribed, retried later
        raise
    description = value["description"]
    session.apply(Mutation("set_shot_description", {"shot_id": shot_id, "value": description}))
    session.store.update_job(job.job_id, status="done", prompts={"user": prompt})
    return description


def describe_pending(session: Session, force: bool = False) -> dict[str, str]:
    """Describe every shot that still lacks a description (ingest queue)."""
    out = {}
    for shot_id, shot in list(session.project.shots.items()):
        if force or not shot.description:
            out[shot_id] = describe_shot(session, shot_id, force=force)
    return out


def describe_scene(session: Session, scene_id: str) -> Scene:
    """Regenerate a scene's title and description from its shots."""
    project = session.project
    scene = project.scene(scene_id)
    schema = obj(tasks.SCENE_DESCRIPTION, {"title": STRING, "description": STRING})
    value, prompt = run_structured(
        session,
        schema=schema,
        template="scene_description",
        template_vars={
            "shot_catalog": base.shot_catalog(project, scene.shots),
            "story_context": project.story_context or "(none yet)",
        },
        creativity=CREATIVITY_EXTRACTION,
    )
    session.apply(
        batch(
            [
                Mutation("set_scene_title", {"scene_id": scene_id, "value": value["title"]}),
                Mutation("set_scene_description", {"scene_id": scene_id, "value": value["description"]}),
            ]
        )
    )
    session.store.new_job("describe_scene", status="done", prompts={"user": prompt}, extra={"scene_id": scene_id})
    return scene


# ---------------------------------------------------------------------------
# Grouping


def group_shots_into_scenes(session: Session, shot_ids: Optional[list[str]] = None) -> list[Scene]:
    """Partition ungrouped shots into new scenes on the active version."""
    project = session.project
    if shot_ids is None:
        shot_ids = project.ungrouped_shots()
    if not shot_ids:
        raise InvariantViolation("nonempty-input", "no ungrouped shots to organize")
    undescribed = [sid for sid in shot_ids if not project.shot(sid).description]
    if undescribed:
        raise InvariantViolation(
            "described-shots", f"shots must be described before grouping: {undescribed}"
        )

    schema = obj(
        tasks.SHOT_GROUPING,
        {
            "scenes": arr(
                obj(
                    None,
                    {
                        "title": STRING,
                        "description": STRING,
                        "shot_ids": id_array(shot_ids, min_items=1, max_items=len(shot_ids)),
                    },
                ),
                min_items=1,
                max_items=len(shot_ids),
            )
        },
    )

    def check(value: dict) -> Optional[str]:
        return base.check_partition(shot_ids, [s["shot_ids"] for s in value["scenes"]])

    value, prompt = run_structured(
        session,
        schema=schema,
        template="shot_grouping",
        template_vars={
            "shot_catalog": base.shot_catalog(project, shot_ids),
            "story_context": project.story_context or "(none yet)",
        },
        creativity=CREATIVITY_EXTRACTION,
        check=check,
        exhausted=lambda problem: _grouping_error(shot_ids, problem),
    )

    groups = value["scenes"]
    ids, seq_step = plan_ids(project, ["scene"] * len(groups))
    steps = [seq_step]
    palette_base = len(project.scenes)
    for k, (scene_id, group) in enumerate(zip(ids, groups)):
        scene = Scene(
            scene_id=scene_id,
            title=group["title"],
            color=PALETTE[(palette_base + k) % len(PALETTE)],
            description=group["description"],
            shots=list(group["shot_ids"]),
            keyframe_shot=group["shot_ids"][0],
        )
        steps.append(Mutation("create_scene", {"scene": scene.to_dict()}))
        steps.append(
            Mutation("insert_scene_ref", {"version_id": project.active_version, "scene_id": scene_id,
                                          "index": len(project.active().scenes) + k})
        )
    session.apply(batch(steps))
    session.store.new_job("group_shots", status="done", prompts={"user": prompt}, extra={"scenes": ids})
    return [project.scene(sid) for sid in ids]


def _grouping_error(shot_ids: list[str], problem: str) -> IncompleteGrouping:
    return IncompleteGrouping(f"grouping failed after repairs: {problem}", orphaned=list(shot_ids))


# ---------------------------------------------------------------------------
# Sequencing and contextual scenes


@dataclass
class NewSceneProposal:
    """A pending connective scene; lives outside the story graph until
    accepted."""

    title: str
    description: str
    insert_index: int
    job_id: str = ""

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "description": self.description,
            "insert_index": self.insert_index,
            "job_id": self.job_id,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NewSceneProposal":
        return cls(
            title=data["title"],
            description=data["description"],
            insert_index=data["insert_index"],
            job_id=data.get("job_id", ""),
        )


@dataclass
class SequenceResult:
    order: list[str]
    proposals: list[NewSceneProposal] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"order": list(self.order), "proposals": [p.to_dict() for p in self.proposals]}


def sequence_scenes(session: Session) -> SequenceResult:
    """Reorder the active version's scenes into a storyline and surface
    narrative-gap proposals (capped at 3 per run)."""
    project = session.project
    scene_ids = list(project.active().scenes)
    if not scene_ids:
        raise InvariantViolation("nonempty-input", "the active version has no scenes to sequence")

    schema = obj(
        tasks.SCENE_SEQUENCE,
        {
            "order": id_array(scene_ids),
            "proposals": arr(
                obj(
                    None,
                    {
                        "title": STRING,
                        "description": STRING,
                        "index": {"type": "integer", "minimum": 0, "maximum": len(scene_ids)},
                    },
                ),
                min_items=0,
                max_items=3,
            ),
        },
    )

    value, prompt = run_structured(
        session,
        schema=schema,
        template="scene_sequence",
        template_vars={
            "scene_catalog": base.scene_catalog(project, scene_ids),
            "story_context": project.story_context or "(none yet)",
        },
        creativity=CREATIVITY_IDEATION,
        check=lambda v: base.check_permutation(scene_ids, v["order"]),
        exhausted=lambda problem: PermutationViolation(f"scene order invalid after repairs: {problem}"),
    )

    if value["order"] != scene_ids:
        session.apply(Mutation("reorder_scenes", {"version_id": project.active_version, "order": value["order"]}))
    job = session.store.new_job(
        "sequence_scenes",
        status="done",
        prompts={"user": prompt},
        intermediates={"proposals": value["proposals"]},
    )
    proposals = [
        NewSceneProposal(
            title=p["title"], description=p["description"], insert_index=p["index"], job_id=job.job_id
        )
        for p in value["proposals"]
    ]
    return SequenceResult(order=list(value["order"]), proposals=proposals)


def accept_scene_proposal(session: Session, proposal: NewSceneProposal) -> Scene:
    """Materialize a pending scene proposal as an empty generated-origin
    scene at its insertion index."""
    project = session.project
    (scene_id,), seq_step = plan_ids(project, ["scene"])
    scene = Scene(
        scene_id=scene_id,
        title=proposal.title,
        color=project.next_palette_color(),
        description=proposal.description,
        generated=True,
    )
    index = max(0, min(proposal.insert_index, len(project.active().scenes)))
    session.apply(
        batch(
            [
                seq_step,
                Mutation("create_scene", {"scene": scene.to_dict()}),
                Mutation(
                    "insert_scene_ref",
                    {"version_id": project.active_version, "scene_id": scene_id, "index": index},
                ),
            ]
        )
    )
    return project.scene(scene_id)


def add_contextual_scene(
    session: Session,
    prev_scene_id: Optional[str] = None,
    next_scene_id: Optional[str] = None,
) -> NewSceneProposal:
    """Propose a connective scene for the gap between two adjacent scenes
    (either neighbor may be absent at the story boundaries)."""
    project = session.project
    if prev_scene_id is None and next_scene_id is None:
        raise InvariantViolation("neighbor-required", "at least one neighboring scene is required")
    if prev_scene_id is not None and prev_scene_id == next_scene_id:
        raise InvariantViolation("distinct-neighbors", "previous and next scene must differ")
    order = project.active().scenes
    for sid in (prev_scene_id, next_scene_id):
        if sid is not None:
            project.scene(sid)
            if sid not in order:
                raise InvariantViolation("in-active-version", f"scene {sid} is not in the active version")
    if prev_scene_id is not None and next_scene_id is not None:
        if order.index(next_scene_id) != order.index(prev_scene_id) + 1:
            raise InvariantViolation(
                "adjacent-scenes", f"{prev_scene_id} and {next_scene_id} are not adjacent"
            )
    insert_index = 0 if prev_scene_id is None else order.index(prev_scene_id) + 1

    def describe(sid: Optional[str], label: str) -> str:
        if sid is None:
            return f"{label}: (story boundary)"
        scene = project.scene(sid)
        return f"{label}: \"{scene.title}\" — {scene.description or '(no description)'}"

    schema = obj(tasks.CONTEXTUAL_SCENE, {"title": STRING, "description": STRING})
    value, prompt = run_structured(
        session,
        schema=schema,
        template="contextual_scene",
        template_vars={
            "prev_block": describe(prev_scene_id, "Before the gap"),
            "next_block": describe(next_scene_id, "After the gap"),
            "story_context": project.story_context or "(none yet)",
        },
        creativity=CREATIVITY_IDEATION,
    )
    job = session.store.new_job(
        "add_contextual_scene",
        status="done",
        prompts={"user": prompt},
        extra={"prev": prev_scene_id, "next": next_scene_id},
    )
    return NewSceneProposal(
        title=value["title"], description=value["description"], insert_index=insert_index, job_id=job.job_id
    )


# ---------------------------------------------------------------------------
# Variations


def create_story_variation(session: Session, user_prompt: str) -> StoryVersion:
    """Build an alternate storyline from (a subset of) the existing shots."""
    project = session.project
    described = [sid for sid, shot in project.shots.items() if shot.description]
    if not described:
        raise InvariantViolation("described-shots", "a variation needs at least one described shot")

    schema = obj(
        tasks.STORY_VARIATION,
        {
            "name": STRING,
            "scenes": arr(
                obj(
                    None,
                    {
                        "title": STRING,
                        "description": STRING,
                        "shot_ids": id_array(described, min_items=1, max_items=len(described)),
                    },
                ),
                min_items=1,
                max_items=max(1, len(described)),
            ),
        },
    )

    value, prompt = run_structured(
        session,
        schema=schema,
        template="story_variation",
        template_vars={
            "user_prompt": user_prompt or "(none: regroup the story as you see fit)",
            "shot_catalog": base.shot_catalog(project, described),
            "story_context": project.story_context or "(none yet)",
        },
        creativity=CREATIVITY_IDEATION,
        check=lambda v: base.check_subset(described, [s["shot_ids"] for s in v["scenes"]]),
        exhausted=lambda problem: UnknownShotId(f"variation referenced invalid shots after repairs: {problem}"),
    )

    groups = value["scenes"]
    ids, seq_step = plan_ids(project, ["scene"] * len(groups) + ["version"])
    scene_ids, version_id = ids[:-1], ids[-1]
    steps = [seq_step]
    palette_base = len(project.scenes)
    for k, (scene_id, group) in enumerate(zip(scene_ids, groups)):
        scene = Scene(
            scene_id=scene_id,
            title=group["title"],
            color=PALETTE[(palette_base + k) % len(PALETTE)],
            description=group["description"],
            shots=list(group["shot_ids"]),
            keyframe_shot=group["shot_ids"][0],
        )
        steps.append(Mutation("create_scene", {"scene": scene.to_dict()}))
    version = StoryVersion(
        version_id=version_id,
        name=value["name"],
        scenes=scene_ids,
        origin="prompted_variation",
        variation_prompt=user_prompt,
    )
    steps.append(Mutation("create_version", {"version": version.to_dict()}))
    session.apply(batch(steps))
    session.store.new_job(
        "create_story_variation", status="done", prompts={"user": prompt}, extra={"version": version_id}
    )
    return project.version(version_id)


@dataclass
class CompareEntry:
    version_id: str
    name: str
    summary: str
    strengths: list[str]
    weaknesses: list[str]

    def to_dict(self) -> dict:
        return {
            "version_id": self.version_id,
            "name": self.name,
            "summary": self.summary,
            "strengths": list(self.strengths),
            "weaknesses": list(self.weaknesses),
        }


@dataclass
class CompareReport:
    entries: list[CompareEntry]

    def to_dict(self) -> dict:
        return {"entries": [e.to_dict() for e in self.entries]}


def compare_story_variations(session: Session, version_ids: Optional[list[str]] = None) -> CompareReport:
    """Summarize strengths and weaknesses of each story version."""
    project = session.project
    if version_ids is None:
        version_ids = [v.version_id for v in project.versions]
    if len(version_ids) < 2:
        raise InvariantViolation("two-versions", "comparison needs at least two versions")
    for vid in version_ids:
        project.version(vid)

    lines = []
    for vid in version_ids:
        version = project.version(vid)
        lines.append(f"Version {vid} \"{version.name}\":")
        lines.append(base.scene_block(project, version.scenes))
    schema = obj(
        tasks.VARIATION_COMPARE,
        {
            "entries": {
                "type": "array",
                "minItems": len(version_ids),
                "maxItems": len(version_ids),
                "items": obj(
                    None,
                    {
                        "version_id": {"type": "string", "enum": list(version_ids)},
                        "summary": STRING,
                        "strengths": arr(STRING, min_items=1, max_items=3),
                        "weaknesses": arr(STRING, min_items=1, max_items=3),
                    },
                ),
            }
        },
    )

    def check(value: dict) -> Optional[str]:
        got = [e["version_id"] for e in value["entries"]]
        return base.check_permutation(version_ids, got)

    value, prompt = run_structured(
        session,
        schema=schema,
        template="variation_compare",
        template_vars={
            "versions_block": "\n".join(lines),
            "story_context": project.story_context or "(none yet)",
        },
        creativity=CREATIVITY_EXTRACTION,
        check=check,
        exhausted=lambda problem: PipelineError(f"comparison entries invalid after repairs: {problem}"),
    )
    by_id = {e["version_id"]: e for e in value["entries"]}
    entries = [
        CompareEntry(
            version_id=vid,
            name=project.version(vid).name,
            summary=by_id[vid]["summary"],
            strengths=by_id[vid]["strengths"],
            weaknesses=by_id[vid]["weaknesses"],
        )
        for vid in version_ids
    ]
    session.store.new_job("compare_variations", status="done", prompts={"user": prompt})
    return CompareReport(entries=entries)
