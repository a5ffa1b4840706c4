"""From a folder of footage to a structured storyline, offline.

Walks the core loop: ingest captured media, describe it, group shots into
scenes, sequence the scenes, and pull story-level writing suggestions.
Runs entirely on the deterministic mock provider.
"""

import tempfile
from pathlib import Path

from storyweave import media, pipelines
from storyweave.mutations import Mutation
from storyweave.session import Session

base = Path(tempfile.mkdtemp(prefix="storyweave-demo-"))
print(f"workspace: {base}\n")

# a handful of stand-in captures (any JPEG/PNG/MP4 works here)
capture_dir = base / "captured"
capture_dir.mkdir()
for i in range(5):
    (capture_dir / f"clip_{i}.png").write_bytes(media.make_placeholder_png(f"{i:064x}"))
(capture_dir / "pan.mp4").write_bytes(media.write_stub_mp4(3.0, 640, 360))

session = Session.create(base / "project", seed=42)
session.apply(
    Mutation(
        "set_story_context",
        {"text": "A long weekend by the sea. We cooked, argued about the map, and made up at the lighthouse."},
    )
)

report = session.store.ingest(session.project, session.apply, sorted(capture_dir.iterdir()))
print(f"ingested {len(report.added)} assets, queued {len(report.describe_jobs)} describe jobs")

pipelines.describe_pending(session)
for shot_id, shot in session.project.shots.items():
    print(f"  {shot_id}: {shot.description}")

print("\ngrouping into scenes...")
scenes = pipelines.group_shots_into_scenes(session)
for scene in scenes:
    print(f"  {scene.scene_id} [{scene.color}] {scene.title!r}: {len(scene.shots)} shots")

print("\nsequencing the storyline...")
result = pipelines.sequence_scenes(session)
print(f"  order: {result.order}")
for proposal in result.proposals:
    print(f"  gap proposal at {proposal.insert_index}: {proposal.title!r}")

print("\nstory suggestions:")
for s in pipelines.generate_story_suggestions(session):
    print(f"  [{s.category}] {s.text}")
    print(f"      tip: {s.tips[0]}")

session.save()
print(f"\nsaved to {session.store.project_path}")
