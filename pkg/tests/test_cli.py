import json

import pytest
from click.testing import CliRunner

from storyweave.cli import main

from .conftest import write_fixture_media


@pytest.fixture
def runner():
    return CliRunner()


def run(runner, tmp_path, *args, expect_exit=0):
    result = runner.invoke(main, ["-p", str(tmp_path / "proj"), *args], catch_exceptions=False)
    assert result.exit_code == expect_exit, result.output
    return json.loads(result.stdout) if result.stdout.strip() else {}


def test_init_then_reinit_fails_cleanly(runner, tmp_path):
    out = run(runner, tmp_path, "init")
    assert out == {"project_id": "project", "revision": 0}
    err = run(runner, tmp_path, "init", expect_exit=1)
    assert err["error"]["code"] == "invariant_violation"


def test_full_flow_emits_machine_readable_json(runner, tmp_path):
    run(runner, tmp_path, "init")
    media = write_fixture_media(tmp_path / "cap", images=3, videos=1)
    out = run(runner, tmp_path, "ingest", *[str(p) for p in media])
    assert len(out["report"]["added"]) == 4

    out = run(runner, tmp_path, "describe")
    assert len(out["descriptions"]) == 4

    out = run(runner, tmp_path, "group")
    scene_ids = [s["scene_id"] for s in out["scenes"]]
    assert scene_ids

    out = run(runner, tmp_path, "sequence")
    assert set(out["result"]["order"]) == set(
        json.loads((tmp_path / "proj" / "project.json").read_text())["versions"][0]["scenes"]
    ) or out["result"]["order"]

    out = run(runner, tmp_path, "suggest", "--level", "story")
    assert 3 <= len(out["suggestions"]) <= 5

    out = run(runner, tmp_path, "notes", "--text", "First light. Then the crossing. Finally home.")
    out = run(runner, tmp_path, "sync-notes")
    assert out["segments"]

    # align + compile the first scene that has shots and a script
    doc = json.loads((tmp_path / "proj" / "project.json").read_text())
    active = next(v for v in doc["versions"] if v["version_id"] == doc["active_version"])
    target = next(
        s for s in active["scenes"] if doc["scenes"][s]["shots"] and doc["scenes"][s]["script"].strip()
    )
    out = run(runner, tmp_path, "align", target)
    assert out["correspondences"]
    out = run(runner, tmp_path, "compile", target)
    assert out["edl"]["total_duration_s"] > 0
    assert out["output"].startswith("renders/")
    assert (tmp_path / "proj" / out["output"]).exists()


def test_compile_without_scenes_exits_nonzero_with_structured_error(runner, tmp_path):
    run(runner, tmp_path, "init")
    err = run(runner, tmp_path, "compile", "--story", expect_exit=1)
    assert err["error"]["code"] == "empty_scene"


def test_suggest_scene_requires_scene_id(runner, tmp_path):
    run(runner, tmp_path, "init")
    result = runner.invoke(main, ["-p", str(tmp_path / "proj"), "suggest", "--level", "scene"])
    assert result.exit_code != 0


def test_expand_scene_accepts_first_candidates(runner, tmp_path):
    run(runner, tmp_path, "init")
    media = write_fixture_media(tmp_path / "cap", images=4, videos=0)
    run(runner, tmp_path, "ingest", *[str(p) for p in media])
    run(runner, tmp_path, "describe")
    out = run(runner, tmp_path, "group")
    scene_id = max(out["scenes"], key=lambda s: len(s["shots"]))["scene_id"]
    out = run(runner, tmp_path, "expand-scene", scene_id, "--accept")
    assert len(out["accepted"]) == len(out["result"]["proposals"])
    for shot in out["accepted"]:
        assert shot["provenance"] == "generated"


def test_stdout_json_and_project_are_byte_reproducible(runner, tmp_path):
    """Two identical runs (fresh dirs, same seed) emit identical stdout and
    identical project.json bytes."""
    outputs = []
    projects = []
    for sub in ("a", "b"):
        base = tmp_path / sub
        base.mkdir()
        media = write_fixture_media(base / "cap", images=3, videos=1, tag="x")
        chunks = []
        for args in (
            ["init"],
            ["ingest", *[str(p.relative_to(base)) for p in sorted(media)]],
            ["describe"],
            ["group"],
            ["sequence"],
            ["suggest", "--level", "story"],
        ):
            import os

            cwd = os.getcwd()
            os.chdir(base)
            try:
                result = runner.invoke(main, ["-p", "proj", *args], catch_exceptions=False)
            finally:
                os.chdir(cwd)
            assert result.exit_code == 0, result.output
            chunks.append(result.stdout)
        outputs.append("".join(chunks))
        projects.append((base / "proj" / "project.json").read_bytes())
    assert outputs[0] == outputs[1]
    assert projects[0] == projects[1]


def test_undo_command_reverts_last_mutation(runner, tmp_path):
    run(runner, tmp_path, "init")
    run(runner, tmp_path, "notes", "--text", "hello")
    doc = json.loads((tmp_path / "proj" / "project.json").read_text())
    assert doc["story_context"] == "hello"
    run(runner, tmp_path, "undo")
    doc = json.loads((tmp_path / "proj" / "project.json").read_text())
    assert doc["story_context"] == ""
