"""Edit Decision List construction and rough-cut rendering.

The EDL is the primary, testable output: a canonical JSON document whose
bytes are a pure function of project state.  Rendering is delegated to a
configurable external command (``{edl}`` and ``{out}`` placeholders); the
compiler only verifies the produced container's duration.
"""

from __future__ import annotations

import shlex
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import media
from .alignment import DEFAULT_SHOT_S, TimedSegment, compute_timings
from .errors import (
    ConfigError,
    DurationMismatch,
    EmptyScene,
    InvariantViolation,
    MissingAsset,
    RenderCommandFailed,
)
from .model import Project, Scene, canonical_json

EDL_SCHEMA_VERSION = 1
DEFAULT_FRAME_RATE = 30
DEFAULT_RESOLUTION = (1920, 1080)
MUSIC_GAIN_DB = -18.0  # fixed bed level relative to narration


def _q(ms: int) -> float:
    return ms / 1000.0


def _ms(seconds: float) -> int:
    return int(seconds * 1000 + 0.5)


@dataclass
class EdlEntry:
    shot_id: str
    asset_uri: str
    kind: str  # video | still | image
    timeline_start_s: float
    duration_s: float
    source_in_s: float = 0.0
    source_out_s: float = 0.0
    strip_audio: bool = False

    def to_dict(self) -> dict:
        return {
            "shot_id": self.shot_id,
            "asset_uri": self.asset_uri,
            "kind": self.kind,
            "timeline_start_s": self.timeline_start_s,
            "duration_s": self.duration_s,
            "source_in_s": self.source_in_s,
            "source_out_s": self.source_out_s,
            "strip_audio": self.strip_audio,
        }


@dataclass
class AudioTrackEntry:
    asset_uri: str
    timeline_start_s: float
    duration_s: float
    gain_db: float = 0.0

    def to_dict(self) -> dict:
        return {
            "asset_uri": self.asset_uri,
            "timeline_start_s": self.timeline_start_s,
            "duration_s": self.duration_s,
            "gain_db": self.gain_db,
        }


@dataclass
class EditDecisionList:
    total_duration_s: float
    entries: list[EdlEntry] = field(default_factory=list)
    narration: list[AudioTrackEntry] = field(default_factory=list)
    music: list[AudioTrackEntry] = field(default_factory=list)
    frame_rate: int = DEFAULT_FRAME_RATE
    resolution: tuple[int, int] = DEFAULT_RESOLUTION

    def to_dict(self) -> dict:
        return {
            "schema_version": EDL_SCHEMA_VERSION,
            "frame_rate": self.frame_rate,
            "resolution": list(self.resolution),
            "total_duration_s": self.total_duration_s,
            "entries": [e.to_dict() for e in self.entries],
            "narration": [t.to_dict() for t in self.narration],
            "music": [t.to_dict() for t in self.music],
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())


def scene_segments(project: Project, scene: Scene, default_shot_s: float = DEFAULT_SHOT_S) -> list[TimedSegment]:
    """Segments for a scene: auto-timed from correspondences when present
    (narration-proportional), otherwise a fixed default per shot."""
    if scene.correspondences:
        narration_s = None
        if scene.narration is not None:
            narration_s = project.asset(scene.narration).duration_s
        return compute_timings(
            scene.correspondences,
            narration_duration_s=narration_s,
            default_shot_s=default_shot_s,
            script_len=len(scene.script),
        )
    segments = []
    start_ms = 0
    step = _ms(default_shot_s)
    for shot_id in scene.shots:
        segments.append(TimedSegment(shot_id=shot_id, start_s=_q(start_ms), duration_s=_q(step)))
        start_ms += step
    return segments


def build_edl(
    project: Project,
    scene: Scene,
    segments: Optional[list[TimedSegment]] = None,
    frame_rate: int = DEFAULT_FRAME_RATE,
    resolution: tuple[int, int] = DEFAULT_RESOLUTION,
) -> EditDecisionList:
    """Turn one scene's timed segments into EDL entries plus audio tracks.

    Videos are trimmed from ``trim.in_s`` (default 0); a source shorter
    than its segment plays fully and then holds its last frame (play +
    still entries).  Images hold for the whole segment.  Audio from
    generated videos is stripped.
    """
    if segments is None:
        segments = scene_segments(project, scene)
    if not segments:
        raise EmptyScene(f"scene {scene.scene_id} has no segments to compile")

    entries: list[EdlEntry] = []
    cursor_ms = 0
    for segment in segments:
        if segment.duration_s <= 0:
            raise InvariantViolation("positive-duration", f"segment for {segment.shot_id} has no duration")
        shot = project.shot(segment.shot_id)
        if shot.asset_id not in project.assets:
            raise MissingAsset(f"shot {shot.shot_id} references missing asset {shot.asset_id}")
        asset = project.assets[shot.asset_id]
        seg_ms = _ms(segment.duration_s)

        if asset.kind == "image":
            entries.append(
                EdlEntry(
                    shot_id=shot.shot_id,
                    asset_uri=asset.uri,
                    kind="image",
                    timeline_start_s=_q(cursor_ms),
                    duration_s=_q(seg_ms),
                )
            )
        elif asset.kind == "video":
            trim_in = shot.trim[0] if shot.trim else 0.0
            trim_out = shot.trim[1] if shot.trim else (asset.duration_s or 0.0)
            available_ms = max(0, _ms(trim_out) - _ms(trim_in))
            play_ms = min(available_ms, seg_ms)
            strip = shot.provenance == "generated"
            if play_ms > 0:
                entries.append(
                    EdlEntry(
                        shot_id=shot.shot_id,
                        asset_uri=asset.uri,
                        kind="video",
                        timeline_start_s=_q(cursor_ms),
                        duration_s=_q(play_ms),
                        source_in_s=_q(_ms(trim_in)),
                        source_out_s=_q(_ms(trim_in) + play_ms),
                        strip_audio=strip,
                    )
                )
            hold_ms = seg_ms - play_ms
            if hold_ms > 0:
                freeze = _q(_ms(trim_in) + play_ms)
                entries.append(
                    EdlEntry(
                        shot_id=shot.shot_id,
                        asset_uri=asset.uri,
                        kind="still",
                        timeline_start_s=_q(cursor_ms + play_ms),
                        duration_s=_q(hold_ms),
                        source_in_s=freeze,
                        source_out_s=freeze,
                        strip_audio=True,
                    )
                )
        else:
            raise InvariantViolation("visual-asset", f"shot {shot.shot_id} is backed by audio, not visuals")
        cursor_ms += seg_ms

    total_ms = cursor_ms
    narration_track = []
    if scene.narration is not None:
        ref = project.asset(scene.narration)
        narration_track.append(
            AudioTrackEntry(
                asset_uri=ref.uri,
                timeline_start_s=0.0,
                duration_s=_q(min(_ms(ref.duration_s or 0.0), total_ms)),
                gain_db=0.0,
            )
        )
    music_track = []
    if scene.music is not None:
        ref = project.asset(scene.music)
        # music shorter than the scene simply ends (silence pads the rest);
        # longer music is truncated at the scene boundary
        music_track.append(
            AudioTrackEntry(
                asset_uri=ref.uri,
                timeline_start_s=0.0,
                duration_s=_q(min(_ms(ref.duration_s or 0.0), total_ms)),
                gain_db=MUSIC_GAIN_DB,
            )
        )

    return EditDecisionList(
        total_duration_s=_q(total_ms),
        entries=entries,
        narration=narration_track,
        music=music_track,
        frame_rate=frame_rate,
        resolution=resolution,
    )


def compile_story(project: Project, version_id: Optional[str] = None) -> EditDecisionList:
    """Concatenate per-scene EDLs along the story timeline; per-scene music
    and narration stay inside their scene's boundaries.  Scenes without
    shots (e.g. accepted-but-unfilled proposals) are skipped."""
    version = project.version(version_id or project.active_version)
    scene_ids = [sid for sid in version.scenes if project.scene(sid).shots]
    if not scene_ids:
        raise EmptyScene(f"version {version.version_id} has no compilable scenes")

    entries: list[EdlEntry] = []
    narration: list[AudioTrackEntry] = []
    music: list[AudioTrackEntry] = []
    offset_ms = 0
    for scene_id in scene_ids:
        scene_edl = build_edl(project, project.scene(scene_id))
        for entry in scene_edl.entries:
            entries.append(
                EdlEntry(
                    shot_id=entry.shot_id,
                    asset_uri=entry.asset_uri,
                    kind=entry.kind,
                    timeline_start_s=_q(offset_ms + _ms(entry.timeline_start_s)),
                    duration_s=entry.duration_s,
                    source_in_s=entry.source_in_s,
                    source_out_s=entry.source_out_s,
                    strip_audio=entry.strip_audio,
                )
            )
        for track, out in ((scene_edl.narration, narration), (scene_edl.music, music)):
            for t in track:
                out.append(
                    AudioTrackEntry(
                        asset_uri=t.asset_uri,
                        timeline_start_s=_q(offset_ms + _ms(t.timeline_start_s)),
                        duration_s=t.duration_s,
                        gain_db=t.gain_db,
                    )
                )
        offset_ms += _ms(scene_edl.total_duration_s)

    return EditDecisionList(
        total_duration_s=_q(offset_ms),
        entries=entries,
        narration=narration,
        music=music,
    )


def render(
    edl: EditDecisionList,
    out_dir: str | Path,
    mode: str = "edl_only",
    name: str = "rough_cut",
    render_command: Optional[str] = None,
    project_root: Optional[str | Path] = None,
) -> Path:
    """Write the EDL JSON; in ``render`` mode also invoke the configured
    external command and verify the output duration within ±0.1 s."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    edl_path = out_dir / f"{name}.edl.json"
    edl_path.write_text(edl.to_json(), encoding="utf-8")
    if mode == "edl_only":
        return edl_path
    if mode != "render":
        raise ConfigError(f"unknown render mode {mode!r}")
    if not render_command:
        raise ConfigError("render mode requires a configured render command ({edl} and {out} placeholders)")

    out_path = out_dir / f"{name}.mp4"
    argv = [
        arg.replace("{edl}", str(edl_path)).replace("{out}", str(out_path))
        for arg in shlex.split(render_command)
    ]
    proc = subprocess.run(
        argv,
        capture_output=True,
        text=True,
        cwd=str(project_root) if project_root else None,
    )
    if proc.returncode != 0 or not out_path.exists():
        raise RenderCommandFailed(
            f"render command exited with {proc.returncode}",
            log=(proc.stdout or "") + (proc.stderr or ""),
        )
    info = media.probe(out_path)
    if info.duration_s is None or abs(info.duration_s - edl.total_duration_s) > 0.1:
        raise DurationMismatch(
            f"rendered duration {info.duration_s} differs from EDL total {edl.total_duration_s} by more than 0.1s"
        )
    return out_path
