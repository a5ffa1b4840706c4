"""Narration and music synthesis for scenes."""

from __future__ import annotations

from typing import Optional

from ..errors import EmptyScript
from ..model import AssetRef
from ..mutations import Mutation
from ..providers.base import MusicRequest, SpeechRequest
from ..session import Session

DEFAULT_MUSIC_DURATION_S = 8.0


def generate_narration(session: Session, scene_id: str) -> AssetRef:
    """Synthesize voiceover for a scene's script and attach it."""
    project = session.project
    scene = project.scene(scene_id)
    if not scene.script.strip():
        raise EmptyScript(f"scene {scene_id} has no script to narrate")
    job = session.store.new_job("narration", status="running", extra={"scene_id": scene_id})
    result = session.hub.synthesize_speech(SpeechRequest(script=scene.script))
    asset_id = result.outputs[0]
    session.apply(Mutation("set_scene_narration", {"scene_id": scene_id, "value": asset_id}))
    session.store.update_job(job.job_id, status="done", output_asset_ids=[asset_id])
    return project.asset(asset_id)


def generate_music(
    session: Session,
    scene_id: str,
    duration_s: Optional[float] = None,
    user_prompt: Optional[str] = None,
    n: int = 1,
) -> list[str]:
    """Synthesize background-music candidates for a scene; the caller picks
    one with :func:`select_music`."""
    project = session.project
    scene = project.scene(scene_id)
    if duration_s is None:
        narration = project.assets.get(scene.narration) if scene.narration else None
        duration_s = narration.duration_s if narration and narration.duration_s else DEFAULT_MUSIC_DURATION_S
    style = user_prompt or f"instrumental bed matching: {scene.description or scene.title}"
    job = session.store.new_job(
        "music", status="running", prompts={"style": style}, extra={"scene_id": scene_id}
    )
    result = session.hub.synthesize_music(MusicRequest(prompt=style, duration_s=duration_s, n=n))
    session.store.update_job(job.job_id, status="done", output_asset_ids=list(result.outputs))
    return list(result.outputs)


def select_music(session: Session, scene_id: str, asset_id: str) -> None:
    session.project.asset(asset_id)
    session.apply(Mutation("set_scene_music", {"scene_id": scene_id, "value": asset_id}))
