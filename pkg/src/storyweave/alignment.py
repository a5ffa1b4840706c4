"""Script-to-visual alignment and deterministic segment timing.

Timing is proportional to character counts on a millisecond grid: each
correspondence's effective span absorbs the uncovered gap that follows it
(and the first span extends back to 0), every segment gets
``narration_ms * chars / total_chars`` rounded to the grid, and the final
segment absorbs the rounding remainder so the total always equals the
narration duration exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import prompts, tasks
from .config import CREATIVITY_EXTRACTION
from .errors import InvariantViolation, SpanViolation, ZeroCoverage
from .model import Correspondence
from .mutations import Mutation
from .pipelines import base as pipeline_base
from .pipelines.base import obj, run_structured
from .session import Session

DEFAULT_SHOT_S = 4.0


@dataclass
class TimedSegment:
    shot_id: str
    start_s: float
    duration_s: float

    def to_dict(self) -> dict:
        return {"shot_id": self.shot_id, "start_s": self.start_s, "duration_s": self.duration_s}


def _ms(seconds: float) -> int:
    return int(seconds * 1000 + 0.5) if seconds >= 0 else -int(-seconds * 1000 + 0.5)


def _validate_spans(correspondences: list[Correspondence]) -> None:
    prev_end = None
    seen: set[str] = set()
    for i, corr in enumerate(correspondences):
        start, end = corr.span
        if not 0 <= start < end:
            raise InvariantViolation("correspondence-span", f"correspondences[{i}]: bad span ({start}, {end})")
        if prev_end is not None and start < prev_end:
            raise InvariantViolation("correspondence-order", f"correspondences[{i}]: spans overlap")
        if corr.shot_id in seen:
            raise InvariantViolation("correspondence-shot-uniqueness", f"shot {corr.shot_id} mapped twice")
        seen.add(corr.shot_id)
        prev_end = end


def effective_chars(correspondences: list[Correspondence], script_len: Optional[int] = None) -> list[int]:
    """Span lengths after gap absorption: the first span starts at 0, each
    gap joins the preceding span, and a known script length extends the
    last span to the end of the script."""
    n = len(correspondences)
    out = []
    for k, corr in enumerate(correspondences):
        start = 0 if k == 0 else corr.span[0]
        if k < n - 1:
            end = correspondences[k + 1].span[0]
        else:
            end = max(corr.span[1], script_len) if script_len is not None else corr.span[1]
        out.append(end - start)
    return out


def compute_timings(
    correspondences: list[Correspondence],
    narration_duration_s: Optional[float] = None,
    default_shot_s: float = DEFAULT_SHOT_S,
    script_len: Optional[int] = None,
) -> list[TimedSegment]:
    """Pure timing function: correspondences in, contiguous segments out."""
    _validate_spans(correspondences)
    if not correspondences:
        raise ZeroCoverage("no correspondences: zero covered characters")

    if narration_duration_s is None:
        durations_ms = [_ms(default_shot_s)] * len(correspondences)
    else:
        chars = effective_chars(correspondences, script_len)
        total = sum(chars)
        if total <= 0:
            raise ZeroCoverage("effective spans cover zero characters")
        narration_ms = _ms(narration_duration_s)
        durations_ms = []
        acc = 0
        for k, c in enumerate(chars):
            if k < len(chars) - 1:
                d = int(narration_ms * c / total + 0.5)
            else:
                d = narration_ms - acc  # last segment absorbs rounding
            durations_ms.append(d)
            acc += d
        if any(d <= 0 for d in durations_ms):
            raise InvariantViolation(
                "positive-duration", "narration too short to give every segment a positive duration"
            )

    segments = []
    start = 0
    for corr, d in zip(correspondences, durations_ms):
        segments.append(TimedSegment(shot_id=corr.shot_id, start_s=start / 1000.0, duration_s=d / 1000.0))
        start += d
    return segments


@dataclass
class SegmentEdit:
    """One user drag on the timeline: resize a segment or move a boundary."""

    kind: str  # resize | move_boundary
    index: int
    delta_s: float


def manual_adjust(
    segments: list[TimedSegment],
    edit: SegmentEdit,
    narration_duration_s: Optional[float] = None,
) -> list[TimedSegment]:
    """Apply a drag edit, re-enforcing contiguity.

    With narration present the total is conserved: resizing a segment
    shifts its boundaries into the neighbors, which shrink.  Without
    narration, resizing extends or shortens the total.
    """
    if not 0 <= edit.index < len(segments):
        raise InvariantViolation("edit-index", f"segment index {edit.index} out of range")
    durations = [_ms(s.duration_s) for s in segments]
    total_before = sum(durations)
    delta = _ms(edit.delta_s)
    conserve = narration_duration_s is not None

    if edit.kind == "move_boundary":
        if edit.index >= len(segments) - 1:
            raise InvariantViolation("edit-index", "move_boundary needs a segment on each side")
        durations[edit.index] += delta
        durations[edit.index + 1] -= delta
    elif edit.kind == "resize":
        i = edit.index
        if not conserve:
            durations[i] += delta
        elif len(segments) == 1:
            raise InvariantViolation("conservation", "cannot resize the only segment under narration")
        elif i == 0:
            durations[i] += delta
            durations[i + 1] -= delta
        elif i == len(segments) - 1:
            durations[i] += delta
            durations[i - 1] -= delta
        else:
            left = delta // 2
            right = delta - left
            durations[i] += delta
            durations[i - 1] -= left
            durations[i + 1] -= right
    else:
        raise InvariantViolation("edit-kind", f"unknown edit kind {edit.kind!r}")

    if any(d <= 0 for d in durations):
        raise InvariantViolation("positive-duration", "an edit may not shrink a segment to zero or below")
    if conserve and sum(durations) != total_before:
        raise InvariantViolation("conservation", "narration-locked edit changed the total duration")

    out = []
    start = 0
    for seg, d in zip(segments, durations):
        out.append(TimedSegment(shot_id=seg.shot_id, start_s=start / 1000.0, duration_s=d / 1000.0))
        start += d
    return out


# ---------------------------------------------------------------------------
# Provider-backed alignment


def auto_align(session: Session, scene_id: str) -> list[Correspondence]:
    """Map the scene's shots to ordered, non-overlapping script spans."""
    project = session.project
    scene = project.scene(scene_id)
    if not scene.script.strip():
        raise InvariantViolation("nonempty-script", f"scene {scene_id} has no script to align against")
    if not scene.shots:
        raise InvariantViolation("nonempty-input", f"scene {scene_id} has no shots to align")
    script_len = len(scene.script)
    shot_ids = list(scene.shots)

    schema = obj(
        tasks.SCRIPT_ALIGNMENT,
        {
            "correspondences": {
                "type": "array",
                "minItems": 1,
                "maxItems": len(shot_ids),
                "items": obj(
                    None,
                    {
                        "shot_id": {"type": "string", "enum": shot_ids},
                        "start": {"type": "integer", "minimum": 0, "maximum": script_len - 1},
                        "end": {"type": "integer", "minimum": 1, "maximum": script_len},
                    },
                ),
            }
        },
    )

    def check(value: dict) -> Optional[str]:
        prev_end = None
        seen = set()
        for item in value["correspondences"]:
            if item["shot_id"] in seen:
                return f"shot {item['shot_id']} is mapped more than once"
            seen.add(item["shot_id"])
            if item["start"] >= item["end"]:
                return f"span ({item['start']}, {item['end']}) is empty or reversed"
            if prev_end is not None and item["start"] < prev_end:
                return "spans must be ordered and non-overlapping"
            prev_end = item["end"]
        return None

    value, prompt = run_structured(
        session,
        schema=schema,
        template="script_alignment",
        template_vars={
            "script_block": prompts.block("SCRIPT", scene.script),
            "shot_catalog": pipeline_base.shot_catalog(project, shot_ids),
        },
        creativity=CREATIVITY_EXTRACTION,
        check=check,
        exhausted=lambda problem: SpanViolation(f"alignment spans invalid after repairs: {problem}"),
    )
    correspondences = [
        Correspondence(shot_id=item["shot_id"], span=(item["start"], item["end"]))
        for item in value["correspondences"]
    ]
    session.apply(
        Mutation(
            "set_correspondences",
            {"scene_id": scene_id, "value": [c.to_dict() for c in correspondences]},
        )
    )
    session.store.new_job("auto_align", status="done", prompts={"user": prompt}, extra={"scene_id": scene_id})
    return correspondences
