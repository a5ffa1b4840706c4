"""Shared fixtures: offline sessions backed by the deterministic mock
provider, plus tiny real media files for ingestion."""

from __future__ import annotations

import hashlib
from pathlib import Path

import pytest

from storyweave import media
from storyweave.session import Session


def fixture_png(tag: str) -> bytes:
    digest = hashlib.sha256(f"png:{tag}".encode()).hexdigest()
    return media.make_placeholder_png(digest, width=320, height=180)


def fixture_mp4(tag: str, duration_s: float = 3.0) -> bytes:
    digest = hashlib.sha256(f"mp4:{tag}".encode()).hexdigest()
    return media.write_stub_mp4(duration_s, 640, 360, payload=bytes.fromhex(digest))


def fixture_wav(tag: str, duration_s: float = 2.0) -> bytes:
    digest = hashlib.sha256(f"wav:{tag}".encode()).hexdigest()
    return media.make_digest_wav(duration_s, digest)


def write_fixture_media(
    directory: Path, images: int = 4, videos: int = 1, audio: int = 0, tag: str = ""
) -> list[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(images):
        p = directory / f"img_{tag}{i}.png"
        p.write_bytes(fixture_png(f"{tag}{i}"))
        paths.append(p)
    for i in range(videos):
        p = directory / f"vid_{tag}{i}.mp4"
        p.write_bytes(fixture_mp4(f"{tag}{i}", duration_s=3.0))
        paths.append(p)
    for i in range(audio):
        p = directory / f"aud_{tag}{i}.wav"
        p.write_bytes(fixture_wav(f"{tag}{i}"))
        paths.append(p)
    return paths


@pytest.fixture
def workspace(tmp_path):
    """A freshly initialized project session on the mock provider."""
    return Session.create(tmp_path / "proj", seed=0)


@pytest.fixture
def media_dir(tmp_path):
    return tmp_path / "captured"


def ingest_fixture_media(session: Session, directory: Path, images: int = 4, videos: int = 1, tag: str = ""):
    paths = write_fixture_media(directory, images=images, videos=videos, tag=tag)
    return session.store.ingest(session.project, session.apply, paths)


@pytest.fixture
def loaded(workspace, media_dir):
    """Session with 4 images + 1 video ingested (not yet described)."""
    ingest_fixture_media(workspace, media_dir)
    return workspace


@pytest.fixture
def described(loaded):
    """Session with all shots described via the mock provider."""
    from storyweave.pipelines import describe_pending

    describe_pending(loaded)
    return loaded


@pytest.fixture
def grouped(described):
    """Session with shots grouped into scenes on the active version."""
    from storyweave.pipelines import group_shots_into_scenes

    group_shots_into_scenes(described)
    return described


def make_scenes(session: Session, sizes: list[int]) -> list[str]:
    """Deterministically partition the loose shot pool into scenes of the
    given sizes (tests that need a specific scene count build them here
    instead of relying on the mock's grouping)."""
    from storyweave.model import PALETTE, Scene
    from storyweave.mutations import Mutation, batch, plan_ids

    pool = session.project.ungrouped_shots()
    assert sum(sizes) <= len(pool), "not enough loose shots"
    ids, seq_step = plan_ids(session.project, ["scene"] * len(sizes))
    steps = [seq_step]
    cursor = 0
    base = len(session.project.scenes)
    for k, (scene_id, size) in enumerate(zip(ids, sizes)):
        shots = pool[cursor : cursor + size]
        cursor += size
        scene = Scene(
            scene_id=scene_id,
            title=f"Scene {k + 1}",
            color=PALETTE[(base + k) % len(PALETTE)],
            description=f"handmade scene {k + 1}",
            shots=shots,
            keyframe_shot=shots[0] if shots else None,
        )
        steps.append(Mutation("create_scene", {"scene": scene.to_dict()}))
        steps.append(
            Mutation(
                "insert_scene_ref",
                {
                    "version_id": session.project.active_version,
                    "scene_id": scene_id,
                    "index": len(session.project.active().scenes) + k,
                },
            )
        )
    session.apply(batch(steps))
    return ids


@pytest.fixture
def multi_scene(described):
    """Session with three handmade scenes (3/1/1 shots)."""
    make_scenes(described, [3, 1, 1])
    return described
