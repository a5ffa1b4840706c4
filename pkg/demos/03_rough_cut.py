"""Notes to narrated rough cut: sync, align, time, and compile.

The timing model is proportional to script characters on a millisecond
grid, with the final segment absorbing rounding so the total always equals
the narration exactly.
"""

import tempfile
from pathlib import Path

from storyweave import alignment, compiler, media, pipelines
from storyweave.mutations import Mutation
from storyweave.session import Session

base = Path(tempfile.mkdtemp(prefix="storyweave-demo-"))
session = Session.create(base / "project", seed=3)

capture_dir = base / "captured"
capture_dir.mkdir()
for i in range(4):
    (capture_dir / f"clip_{i}.png").write_bytes(media.make_placeholder_png(f"{i + 77:064x}"))
session.store.ingest(session.project, session.apply, sorted(capture_dir.iterdir()))
pipelines.describe_pending(session)
scene = pipelines.group_shots_into_scenes(session)[0]

session.apply(
    Mutation(
        "set_story_context",
        {"text": "The ferry left at eight. We stood at the rail the whole crossing. Gulls followed us into the harbor."},
    )
)
segments_by_scene = pipelines.sync_notes_to_script(session)
print("scripts:")
for scene_id, text in segments_by_scene.items():
    print(f"  {scene_id}: {text!r}")

narration = pipelines.generate_narration(session, scene.scene_id)
print(f"\nnarration: {narration.duration_s}s")

correspondences = alignment.auto_align(session, scene.scene_id)
print("correspondences (shot -> script span):")
for c in correspondences:
    print(f"  {c.shot_id} -> {c.span}")

segments = compiler.scene_segments(session.project, session.project.scene(scene.scene_id))
print("\ntimed segments:")
for seg in segments:
    print(f"  {seg.shot_id}: start {seg.start_s}s, {seg.duration_s}s")
total = sum(round(seg.duration_s * 1000) for seg in segments)
print(f"  total {total} ms == narration {round((narration.duration_s or 0) * 1000)} ms")

# nudge the middle segment wider; neighbors shrink, total is conserved
if len(segments) >= 3:
    edited = alignment.manual_adjust(
        segments, alignment.SegmentEdit("resize", 1, 0.5), narration_duration_s=narration.duration_s
    )
    print("\nafter widening segment 1 by 0.5s:")
    for seg in edited:
        print(f"  {seg.shot_id}: {seg.duration_s}s")

edl = compiler.build_edl(session.project, session.project.scene(scene.scene_id))
out = compiler.render(edl, base / "renders", mode="edl_only", name=scene.scene_id)
print(f"\nEDL written to {out} ({edl.total_duration_s}s, {len(edl.entries)} entries)")
session.save()
