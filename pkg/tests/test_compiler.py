import sys
from pathlib import Path

import pytest

from storyweave.alignment import TimedSegment
from storyweave.compiler import build_edl, compile_story, render, scene_segments
from storyweave.errors import (
    ConfigError,
    DurationMismatch,
    EmptyScene,
    MissingAsset,
    RenderCommandFailed,
)
from storyweave.model import AssetRef, Correspondence, GenerationProvenance, Scene, Shot, new_project

RENDER_STUB = f"{sys.executable} {Path(__file__).parent / 'render_stub.py'} {{edl}} {{out}}"


def edl_project():
    p = new_project("edl")
    p.assets["asset-i"] = AssetRef("asset-i", "image", "assets/i.png", "c1" * 32, width=640, height=360)
    p.assets["asset-v"] = AssetRef("asset-v", "video", "assets/v.mp4", "c2" * 32, duration_s=3.0, width=640, height=360)
    p.assets["asset-n"] = AssetRef("asset-n", "audio", "assets/n.wav", "c3" * 32, duration_s=8.0)
    p.assets["asset-m"] = AssetRef("asset-m", "audio", "assets/m.wav", "c4" * 32, duration_s=20.0)
    p.shots["shot-i"] = Shot("shot-i", "asset-i", "captured")
    p.shots["shot-v"] = Shot("shot-v", "asset-v", "captured")
    scene = Scene(
        scene_id="scene-1",
        title="One",
        color="#5B8DEF",
        shots=["shot-i", "shot-v"],
        keyframe_shot="shot-i",
    )
    p.scenes["scene-1"] = scene
    p.versions[0].scenes.append("scene-1")
    return p, scene


def test_two_four_second_segments_total_eight():
    p, scene = edl_project()
    segments = [TimedSegment("shot-i", 0.0, 4.0), TimedSegment("shot-v", 4.0, 4.0)]
    edl = build_edl(p, scene, segments)
    assert edl.total_duration_s == 8.0


def test_short_video_plays_then_holds_last_frame():
    p, scene = edl_project()
    segments = [TimedSegment("shot-v", 0.0, 5.0)]  # source is 3.0s
    edl = build_edl(p, scene, segments)
    assert [e.kind for e in edl.entries] == ["video", "still"]
    play, hold = edl.entries
    assert play.duration_s == 3.0
    assert play.source_out_s - play.source_in_s == play.duration_s
    assert hold.duration_s == 2.0
    assert hold.source_in_s == hold.source_out_s == 3.0  # freeze point
    assert hold.timeline_start_s == 3.0
    assert edl.total_duration_s == 5.0


def test_trim_offsets_source_window():
    p, scene = edl_project()
    p.shots["shot-v"].trim = (1.0, 2.5)
    segments = [TimedSegment("shot-v", 0.0, 1.0)]
    edl = build_edl(p, scene, segments)
    entry = edl.entries[0]
    assert entry.source_in_s == 1.0
    assert entry.source_out_s == 2.0


def test_image_holds_full_segment():
    p, scene = edl_project()
    segments = [TimedSegment("shot-i", 0.0, 6.0)]
    edl = build_edl(p, scene, segments)
    assert edl.entries[0].kind == "image"
    assert edl.entries[0].duration_s == 6.0


def test_generated_video_audio_stripped():
    p, scene = edl_project()
    p.shots["shot-v"].provenance = "generated"
    p.shots["shot-v"].generation = GenerationProvenance(job_id="job-0001", source_prompt="p")
    edl = build_edl(p, scene, [TimedSegment("shot-v", 0.0, 2.0)])
    assert edl.entries[0].strip_audio is True
    p.shots["shot-v"].provenance = "captured"
    p.shots["shot-v"].generation = None
    edl = build_edl(p, scene, [TimedSegment("shot-v", 0.0, 2.0)])
    assert edl.entries[0].strip_audio is False


def test_audio_tracks_attached_with_fixed_music_gain():
    p, scene = edl_project()
    scene.narration = "asset-n"
    scene.music = "asset-m"
    edl = build_edl(p, scene, [TimedSegment("shot-i", 0.0, 8.0)])
    assert edl.narration[0].timeline_start_s == 0.0
    assert edl.narration[0].gain_db == 0.0
    assert edl.music[0].gain_db == -18.0
    assert edl.music[0].duration_s == 8.0  # truncated at the scene boundary


def test_empty_scene_rejected():
    p, scene = edl_project()
    scene.shots = []
    scene.keyframe_shot = None
    with pytest.raises(EmptyScene):
        build_edl(p, scene, [])


def test_missing_asset_named():
    p, scene = edl_project()
    del p.assets["asset-i"]
    with pytest.raises(MissingAsset):
        build_edl(p, scene, [TimedSegment("shot-i", 0.0, 2.0)])


def test_scene_segments_prefer_correspondences_with_narration():
    p, scene = edl_project()
    scene.script = "x" * 30
    scene.narration = "asset-n"  # 8.0s
    scene.correspondences = [Correspondence("shot-i", (0, 10)), Correspondence("shot-v", (10, 30))]
    segments = scene_segments(p, scene)
    assert [seg.duration_s for seg in segments] == [pytest.approx(2.667, abs=0.001), pytest.approx(5.333, abs=0.001)]
    assert sum(round(seg.duration_s * 1000) for seg in segments) == 8000


def test_scene_segments_fall_back_to_default_per_shot():
    p, scene = edl_project()
    segments = scene_segments(p, scene)
    assert [seg.duration_s for seg in segments] == [4.0, 4.0]


def test_edl_canonical_json_is_byte_stable():
    p, scene = edl_project()
    segs = [TimedSegment("shot-i", 0.0, 4.0), TimedSegment("shot-v", 4.0, 4.0)]
    a = build_edl(p, scene, segs).to_json()
    b = build_edl(p, scene, segs).to_json()
    assert a == b
    assert a.encode() == b.encode()


def test_compile_story_concatenates_scene_timelines():
    p, scene = edl_project()
    scene2 = Scene(
        scene_id="scene-2", title="Two", color="#E8743B", shots=["shot-v"], keyframe_shot="shot-v"
    )
    # second scene needs its own shot: shots are unique per version
    p.shots["shot-v2"] = Shot("shot-v2", "asset-v", "captured")
    scene2.shots = ["shot-v2"]
    scene2.keyframe_shot = "shot-v2"
    p.scenes["scene-2"] = scene2
    p.versions[0].scenes.append("scene-2")
    edl = compile_story(p)
    assert edl.total_duration_s == 12.0  # 8 + 4
    second_scene_entries = [e for e in edl.entries if e.shot_id == "shot-v2"]
    assert second_scene_entries[0].timeline_start_s == 8.0


def test_compile_story_entry_order_follows_scene_order():
    p, scene = edl_project()
    p.shots["shot-v2"] = Shot("shot-v2", "asset-v", "captured")
    scene2 = Scene(scene_id="scene-2", title="Two", color="#E8743B", shots=["shot-v2"], keyframe_shot="shot-v2")
    p.scenes["scene-2"] = scene2
    p.versions[0].scenes.append("scene-2")
    first = compile_story(p)
    p.versions[0].scenes = ["scene-2", "scene-1"]
    second = compile_story(p)
    assert [e.shot_id for e in first.entries] != [e.shot_id for e in second.entries]
    assert second.entries[0].shot_id == "shot-v2"


def test_compile_empty_version_rejected():
    p, _ = edl_project()
    p.versions[0].scenes = []
    with pytest.raises(EmptyScene):
        compile_story(p)


def test_render_edl_only_writes_canonical_file(tmp_path):
    p, scene = edl_project()
    edl = build_edl(p, scene, [TimedSegment("shot-i", 0.0, 4.0)])
    path = render(edl, tmp_path, mode="edl_only")
    assert path.read_text() == edl.to_json()
    again = render(edl, tmp_path, mode="edl_only")
    assert again.read_bytes() == path.read_bytes()


def test_render_mode_requires_command(tmp_path):
    p, scene = edl_project()
    edl = build_edl(p, scene, [TimedSegment("shot-i", 0.0, 4.0)])
    with pytest.raises(ConfigError):
        render(edl, tmp_path, mode="render", render_command=None)


def test_render_invokes_command_and_probes_duration(tmp_path):
    p, scene = edl_project()
    edl = build_edl(p, scene, [TimedSegment("shot-i", 0.0, 8.0)])
    out = render(edl, tmp_path, mode="render", render_command=RENDER_STUB)
    from storyweave import media

    info = media.probe(out)
    assert abs(info.duration_s - 8.0) <= 0.1


def test_render_duration_mismatch_detected(tmp_path):
    p, scene = edl_project()
    edl = build_edl(p, scene, [TimedSegment("shot-i", 0.0, 8.0)])
    with pytest.raises(DurationMismatch):
        render(edl, tmp_path, mode="render", render_command=RENDER_STUB + " 0.5")


def test_render_command_failure_captures_log(tmp_path):
    p, scene = edl_project()
    edl = build_edl(p, scene, [TimedSegment("shot-i", 0.0, 4.0)])
    with pytest.raises(RenderCommandFailed) as err:
        render(edl, tmp_path, mode="render", render_command=f"{sys.executable} -c 'import sys; sys.exit(3)'")
    assert "3" in str(err.value)
