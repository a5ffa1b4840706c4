"""Expanding a scene with generated shots, then animating a keyframe.

Shows the two-stage generation pipeline: contextual keyframe candidates
ideated from the neighboring shots, acceptance into the scene, and
keyframe-to-video animation where annotations steer the prompt but the
clean keyframe is what the video model receives.
"""

import tempfile
from pathlib import Path

from storyweave import media, pipelines
from storyweave.session import Session

base = Path(tempfile.mkdtemp(prefix="storyweave-demo-"))
session = Session.create(base / "project", seed=7)

capture_dir = base / "captured"
capture_dir.mkdir()
for i in range(3):
    (capture_dir / f"clip_{i}.png").write_bytes(media.make_placeholder_png(f"{i + 9:064x}"))
session.store.ingest(session.project, session.apply, sorted(capture_dir.iterdir()))
pipelines.describe_pending(session)
scene = pipelines.group_shots_into_scenes(session)[0]
print(f"scene {scene.scene_id}: {scene.shots}")

print("\ncontextual shot between the first two shots...")
proposal = pipelines.add_contextual_shot(
    session,
    scene.scene_id,
    prev_shot_id=scene.shots[0],
    next_shot_id=scene.shots[1] if len(scene.shots) > 1 else None,
    user_prompt="bridge the two moments with a quiet detail",
)
print(f"  three candidates: {proposal.candidates}")
print(f"  why: {proposal.explanation.split(' | ')[0]}")

accepted = pipelines.accept_shot_proposal(session, proposal, chosen=0)
print(f"  accepted as {accepted.shot_id} (provenance={accepted.provenance})")

print("\nannotate the new keyframe and animate it...")
annotated_raster = media.make_placeholder_png("a" * 64)  # stands in for the flattened overlay
annotation = session.store.register_bytes(session.project, session.apply, annotated_raster, ".png")
fields = pipelines.suggest_video_prompt(session, accepted.shot_id, annotation_asset_id=annotation.asset_id)
print(f"  suggested prompt fields: {fields}")

result = pipelines.generate_video_variations(
    session, accepted.shot_id, annotation_asset_id=annotation.asset_id, user_prompt="slow reveal"
)
print(f"  augmented prompt: {result.augmented_prompt}")
print(f"  {len(result.candidates)} video variants")

# the capture log proves the clean-keyframe rule
video_calls = [e for e in session.provider.request_log if e["kind"] == "video"]
clean = session.project.asset(result.keyframe_asset_id).checksum
for call in video_calls:
    sent = call["payload"]["keyframe_checksum"]
    print(f"  video model received checksum {sent[:12]} (clean={sent == clean}, annotated={sent == annotation.checksum})")

shot = pipelines.apply_video_variation(session, result, 0)
print(f"\nscene now ends with {shot.shot_id}: {session.project.asset(shot.asset_id).kind}")
session.save()
