"""Acceptance suite: every release criterion at its stated tolerance,
one printed PASS line per criterion (run with ``pytest -v -s``).

Everything runs against the deterministic mock provider.
"""

from __future__ import annotations

import json
import random
import subprocess
import sys
import time
from pathlib import Path

from storyweave import alignment as al
from storyweave import compiler
from storyweave import pipelines as pl
from storyweave.errors import IntegrityError, InvariantViolation, SchemaMismatch
from storyweave.jobs import JobManager
from storyweave.model import Correspondence, project_state_json, validate_project
from storyweave.mutations import Mutation, MutationLog
from storyweave.providers.base import ImageGenRequest
from storyweave.session import Session
from storyweave.store import ProjectStore

from .conftest import fixture_png, write_fixture_media
from .fuzzing import random_correspondences, random_project
from .test_mutations import random_mutation
from .test_mutations import tiny_project

RENDER_STUB = f"{sys.executable} {Path(__file__).parent / 'render_stub.py'} {{edl}} {{out}}"


def report(n: int, name: str, ok: bool) -> None:
    print(f"\nACCEPTANCE {n} {name}: {'PASS' if ok else 'FAIL'}")
    assert ok, f"criterion {n} ({name}) failed"


# ---------------------------------------------------------------------------
# 1. End-to-end golden run


def _cli(base: Path, *args: str) -> dict:
    proc = subprocess.run(
        [sys.executable, "-m", "storyweave.cli", "-p", "proj", *args],
        cwd=base,
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, f"{args}: {proc.stdout}{proc.stderr}"
    return json.loads(proc.stdout)


def _golden_run(base: Path) -> tuple[bytes, bytes]:
    base.mkdir(parents=True, exist_ok=True)
    media = write_fixture_media(base / "cap", images=5, videos=1, tag="gold")
    _cli(base, "init")
    # story context seeds the notes->script sync the later steps build on
    _cli(
        base,
        "notes",
        "--text",
        "We left before sunrise. The streets were still wet. By the harbor the light turned gold. "
        "Breakfast was bread and oranges. We argued about the map. The ferry horn ended it.",
    )
    _cli(base, "ingest", *[str(p.relative_to(base)) for p in sorted(media)])
    _cli(base, "describe")
    grouped = _cli(base, "group")
    _cli(base, "sequence")
    _cli(base, "suggest", "--level", "story")
    _cli(base, "sync-notes")

    doc = json.loads((base / "proj" / "project.json").read_text())
    active = next(v for v in doc["versions"] if v["version_id"] == doc["active_version"])
    expand_target = max(active["scenes"], key=lambda s: len(doc["scenes"][s]["shots"]))
    expanded = _cli(base, "expand-scene", expand_target, "--accept")

    doc = json.loads((base / "proj" / "project.json").read_text())
    active = next(v for v in doc["versions"] if v["version_id"] == doc["active_version"])
    align_target = next(
        s for s in active["scenes"] if doc["scenes"][s]["shots"] and doc["scenes"][s]["script"].strip()
    )
    animate_target = next(
        sid
        for sid in doc["scenes"][align_target]["shots"]
        if doc["assets"][doc["shots"][sid]["asset_id"]]["kind"] == "image"
    )
    _cli(base, "animate", animate_target)
    _cli(base, "align", align_target)
    compiled = _cli(base, "compile", align_target)

    project_bytes = (base / "proj" / "project.json").read_bytes()
    edl_bytes = (base / "proj" / compiled["output"]).read_bytes()
    return project_bytes, edl_bytes


def test_criterion_1_end_to_end_golden_run(tmp_path):
    start = time.monotonic()
    run_a = _golden_run(tmp_path / "a")
    elapsed = time.monotonic() - start
    run_b = _golden_run(tmp_path / "b")
    ok = run_a == run_b and elapsed < 30.0
    print(f"\n  golden run took {elapsed:.1f}s; project.json {len(run_a[0])} bytes, edl {len(run_a[1])} bytes")
    report(1, "end-to-end golden run, byte-identical across two runs, <30s", ok)


# ---------------------------------------------------------------------------
# 2. Count contracts on 100 randomized mock runs


def test_criterion_2_count_contracts(tmp_path):
    session = Session.create(tmp_path / "proj", seed=0)
    media = write_fixture_media(tmp_path / "cap", images=3, videos=0)
    session.store.ingest(session.project, session.apply, media)
    pl.describe_pending(session)
    from .conftest import make_scenes

    make_scenes(session, [3])
    scene_id = session.project.active().scenes[0]
    shot_ids = session.project.scene(scene_id).shots

    ok = True
    for i in range(100):
        session.provider.seed = i
        story = pl.generate_story_suggestions(session)
        ok &= 3 <= len(story) <= 5
        scene = pl.generate_scene_suggestions(session, scene_id)
        ok &= 1 <= len(scene) <= 2
        options = pl.refine_text(session, "A line about the harbor.")
        ok &= len(options) == 3 and len(set(options)) == 3
        proposal = pl.add_contextual_shot(session, scene_id, prev_shot_id=shot_ids[0])
        ok &= len(proposal.candidates) == 3
        videos = pl.generate_video_variations(session, shot_ids[1])
        ok &= len(videos.candidates) == 2
        if not ok:
            break
    report(2, "count contracts over 100 randomized runs (3-5 / 1-2 / 3 / 3 / 2)", ok)


# ---------------------------------------------------------------------------
# 3. Partition / permutation properties over 200 fuzzed projects


def _fuzz_session(tmp_path: Path, rng: random.Random, i: int) -> Session:
    session = Session.create(tmp_path / f"fuzz{i}", seed=rng.randint(0, 10_000))
    n = rng.randint(1, 9)
    steps = []
    from storyweave.model import AssetRef, Shot

    for k in range(n):
        checksum = f"{rng.getrandbits(128):032x}" + "0" * 32
        ref = AssetRef(
            asset_id=f"asset-{checksum[:12]}",
            kind="image",
            uri=f"assets/{checksum[:12]}.png",
            checksum=checksum,
            width=320,
            height=180,
        )
        shot = Shot(
            shot_id=f"shot-{k:04d}",
            asset_id=ref.asset_id,
            provenance="captured",
            description=f"fuzz shot {k} " + " ".join(str(rng.randint(0, 99)) for _ in range(4)),
        )
        steps.append(Mutation("register_asset", {"asset": ref.to_dict()}))
        steps.append(Mutation("create_shot", {"shot": shot.to_dict()}))
    from storyweave.mutations import batch

    session.apply(batch(steps))
    return session


def test_criterion_3_partition_permutation_zero_invented_ids(tmp_path):
    rng = random.Random(3)
    violations = 0
    for i in range(200):
        session = _fuzz_session(tmp_path, rng, i)
        input_ids = set(session.project.shots)
        scenes = pl.group_shots_into_scenes(session)
        flat = [sid for scene in scenes for sid in scene.shots]
        if set(flat) != input_ids or len(flat) != len(set(flat)) or any(not s.shots for s in scenes):
            violations += 1
        before = list(session.project.active().scenes)
        result = pl.sequence_scenes(session)
        if sorted(result.order) != sorted(before):
            violations += 1
        if any(set(result.order) - set(before)):
            violations += 1
        variation = pl.create_story_variation(session, "fuzz variation")
        used = [
            sid for scene_id in variation.scenes for sid in session.project.scene(scene_id).shots
        ]
        if set(used) - input_ids or len(used) != len(set(used)):
            violations += 1
    report(3, "200 fuzzed projects: partitions, permutations, zero invented ids", violations == 0)


# ---------------------------------------------------------------------------
# 4. Clean-keyframe rule


def test_criterion_4_clean_keyframe_rule(tmp_path):
    violations = 0
    runs = 0
    for i in range(50):
        session = Session.create(tmp_path / f"kf{i}", seed=i)
        clean = session.store.register_bytes(
            session.project, session.apply, fixture_png(f"clean{i}"), ".png"
        )
        annotated = session.store.register_bytes(
            session.project, session.apply, fixture_png(f"annot{i}"), ".png"
        )
        from storyweave.model import Shot
        from storyweave.mutations import batch

        shot = Shot(shot_id="shot-0001", asset_id=clean.asset_id, provenance="captured", description="kf")
        session.apply(Mutation("create_shot", {"shot": shot.to_dict()}))
        pl.generate_video_variations(
            session, "shot-0001", annotation_asset_id=annotated.asset_id, user_prompt=f"fuzz {i}"
        )
        video_requests = [e for e in session.provider.request_log if e["kind"] == "video"]
        runs += len(video_requests)
        for entry in video_requests:
            if entry["payload"]["keyframe_checksum"] != clean.checksum:
                violations += 1
            if entry["payload"]["keyframe_checksum"] == annotated.checksum:
                violations += 1
    print(f"\n  {runs} captured video-model requests checked")
    report(4, "clean-keyframe rule: annotated raster never reaches the video model", violations == 0 and runs >= 100)


# ---------------------------------------------------------------------------
# 5. Timing conservation


def test_criterion_5_timing_conservation():
    rng = random.Random(5)
    ok = True
    for _ in range(1000):
        script_len = rng.randint(4, 400)
        shot_ids = [f"s{k}" for k in range(rng.randint(1, 12))]
        corrs = random_correspondences(rng, shot_ids, script_len)
        narration_ms = rng.randint(1500, 120_000)
        try:
            segments = al.compute_timings(
                corrs, narration_duration_s=narration_ms / 1000.0, script_len=script_len
            )
        except InvariantViolation:
            # degenerate: narration too short for a positive grid slot each
            if narration_ms >= 1000 * len(corrs):
                ok = False
            continue
        total = sum(round(seg.duration_s * 1000) for seg in segments)
        if total != narration_ms:
            ok = False
            break
        cursor = 0
        for seg in segments:
            if round(seg.start_s * 1000) != cursor:
                ok = False
            cursor += round(seg.duration_s * 1000)
    hand = al.compute_timings(
        [Correspondence("a", (0, 30)), Correspondence("b", (30, 90)), Correspondence("c", (90, 120))],
        narration_duration_s=10.0,
    )
    ok &= [seg.duration_s for seg in hand] == [2.5, 5.0, 2.5]
    report(5, "1000 random correspondence sets conserve narration at ms resolution; 30/60/30@10s = 2.5/5/2.5", ok)


# ---------------------------------------------------------------------------
# 6. EDL duration accounting


def test_criterion_6_edl_duration_accounting(tmp_path):
    from .test_compiler import edl_project
    from storyweave.alignment import TimedSegment

    p, scene = edl_project()
    segments = [TimedSegment("shot-i", 0.0, 4.25), TimedSegment("shot-v", 4.25, 3.75)]
    edl = compiler.build_edl(p, scene, segments)
    ok = edl.total_duration_s == 8.0

    # edl_only: canonical JSON is golden-stable
    first = compiler.render(edl, tmp_path / "r1", mode="edl_only").read_bytes()
    second = compiler.render(compiler.build_edl(p, scene, segments), tmp_path / "r2", mode="edl_only").read_bytes()
    ok &= first == second

    # with a configured render command, the probed output matches ±0.1s
    out = compiler.render(edl, tmp_path / "r3", mode="render", render_command=RENDER_STUB)
    from storyweave import media

    info = media.probe(out)
    ok &= abs(info.duration_s - edl.total_duration_s) <= 0.1
    report(6, "EDL accounting: golden-stable JSON; rendered duration within ±0.1s", ok)


# ---------------------------------------------------------------------------
# 7. Persistence round-trip over 500 randomized projects


def test_criterion_7_persistence_round_trip(tmp_path):
    rng = random.Random(7)
    store = ProjectStore(tmp_path / "proj")
    store.root.mkdir(parents=True, exist_ok=True)
    ok = True
    for i in range(500):
        project = random_project(rng)
        store.save(project)
        loaded, _ = store.load()
        if project_state_json(loaded) != project_state_json(project):
            ok = False
            break

    # corrupted references are always rejected with the offending id named
    rejected = 0
    for i in range(50):
        project = random_project(rng)
        while not project.shots:
            project = random_project(rng)
        store.save(project)
        doc = json.loads(store.project_path.read_text())
        shot_key = rng.choice(list(doc["shots"]))
        ghost = f"asset-ghost{i:04d}"
        doc["shots"][shot_key]["asset_id"] = ghost
        store.project_path.write_text(json.dumps(doc))
        try:
            ProjectStore(store.root).load()
        except (IntegrityError, SchemaMismatch, InvariantViolation) as exc:
            if ghost in str(exc):
                rejected += 1
    ok &= rejected == 50
    report(7, "save-load identity over 500 random projects; corrupt refs rejected by name", ok)


# ---------------------------------------------------------------------------
# 8. Concurrency contract


def test_criterion_8_concurrency(tmp_path):
    session = Session.create(tmp_path / "proj", seed=0)
    session.provider.latency_s = 0.2

    # 3 keyframe candidates fan out under the semaphore: < 450 ms
    from storyweave.pipelines.base import fan_out

    start = time.monotonic()
    results, errors = fan_out(
        [
            (lambda i=i: session.hub.generate_image(ImageGenRequest(prompt="kf", n=1, seed=i)))
            for i in range(3)
        ]
    )
    candidate_elapsed = time.monotonic() - start
    ok = not errors and len([r for r in results if r]) == 3 and candidate_elapsed < 0.45

    # 8 queued jobs never exceed 4 in flight
    session.provider.max_inflight = 0
    manager = JobManager(max_workers=session.config.max_parallel_calls)
    envelopes = [
        manager.submit(
            "gen", lambda i=i: session.hub.generate_image(ImageGenRequest(prompt=f"j{i}", n=1))
        )
        for i in range(8)
    ]
    deadline = time.monotonic() + 10
    while any(e.status not in ("done", "failed") for e in envelopes):
        assert time.monotonic() < deadline
        time.sleep(0.01)
    ok &= all(e.status == "done" for e in envelopes)
    ok &= session.provider.max_inflight <= 4
    ok &= manager.max_running <= 4
    print(
        f"\n  3 candidates in {candidate_elapsed * 1000:.0f}ms; "
        f"max in flight {session.provider.max_inflight}"
    )
    report(8, "3 candidates < 450ms; 8 queued jobs never exceed 4 in flight", ok)


# ---------------------------------------------------------------------------
# 9. Undo soundness over 1000 random mutation sequences


def test_criterion_9_undo_soundness():
    rng = random.Random(9)
    ok = True
    for _ in range(1000):
        project = tiny_project()
        log = MutationLog()
        initial = project_state_json(project)
        applied = 0
        for _ in range(rng.randint(1, 10)):
            try:
                log.apply(project, random_mutation(rng, project))
                applied += 1
            except (InvariantViolation, Exception):
                pass
        for _ in range(applied):
            log.undo(project)
        if project_state_json(project) != initial:
            ok = False
            break
        validate_project(project)
    report(9, "1000 random mutation sequences: full undo restores the initial serialization", ok)
