import json
import socket
import threading
import time

import httpx
import pytest
import uvicorn
from fastapi.testclient import TestClient

from storyweave.service import OPS, ProjectHandle, create_app


@pytest.fixture
def client(described):
    handle = ProjectHandle(described)
    app = create_app({described.project.project_id: handle})
    with TestClient(app) as c:
        c.handle = handle
        yield c


def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@pytest.fixture
def live(described):
    """Real uvicorn server (the in-process test client buffers streaming
    responses, so SSE behavior needs a live socket)."""
    handle = ProjectHandle(described)
    app = create_app({described.project.project_id: handle})
    port = _free_port()
    server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10
    while not server.started:
        if time.monotonic() > deadline:
            raise TimeoutError("server never started")
        time.sleep(0.01)
    yield f"http://127.0.0.1:{port}", handle
    server.should_exit = True
    thread.join(timeout=5)


def read_events(base_url: str, since: int, count: int, timeout: float = 10.0) -> list[dict]:
    events = []
    with httpx.stream("GET", f"{base_url}/projects/project/events?since={since}", timeout=timeout) as r:
        for line in r.iter_lines():
            if line.startswith("data: "):
                events.append(json.loads(line[len("data: ") :]))
                if len(events) >= count:
                    break
    return events


def wait_job(client, pid, job_id, timeout=10.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        envelope = client.get(f"/projects/{pid}/jobs/{job_id}").json()
        if envelope["status"] in ("done", "failed"):
            return envelope
        time.sleep(0.01)
    raise TimeoutError(f"job {job_id} never finished")


def test_get_project_carries_revision(client):
    r = client.get("/projects/project")
    assert r.status_code == 200
    body = r.json()
    assert body["revision"] == client.handle.session.revision
    assert body["project"]["project_id"] == "project"


def test_unknown_project_404(client):
    assert client.get("/projects/ghost").status_code == 404


def test_mutation_roundtrip_and_revision_bump(client):
    rev = client.get("/projects/project").json()["revision"]
    r = client.post(
        "/projects/project/mutations",
        json={"revision": rev, "mutation": {"kind": "set_story_context", "params": {"text": "hi"}}},
    )
    assert r.status_code == 200
    assert r.json()["revision"] == rev + 1
    assert r.json()["project"]["story_context"] == "hi"


def test_stale_revision_conflict_409(client):
    rev = client.get("/projects/project").json()["revision"]
    ok = client.post(
        "/projects/project/mutations",
        json={"revision": rev, "mutation": {"kind": "set_story_context", "params": {"text": "a"}}},
    )
    assert ok.status_code == 200
    stale = client.post(
        "/projects/project/mutations",
        json={"revision": rev, "mutation": {"kind": "set_story_context", "params": {"text": "b"}}},
    )
    assert stale.status_code == 409
    assert client.handle.session.project.story_context == "a"


def test_mutation_unknown_id_404(client):
    r = client.post(
        "/projects/project/mutations",
        json={"mutation": {"kind": "set_scene_title", "params": {"scene_id": "ghost", "value": "x"}}},
    )
    assert r.status_code == 404


def test_invariant_violation_422(client):
    scene_ids = client.handle.session.project.active().scenes
    r = client.post(
        "/projects/project/ops/contextual-scene",
        json={"params": {"prev_scene_id": None, "next_scene_id": None}},
    )
    assert r.status_code == 202
    envelope = wait_job(client, "project", r.json()["job_id"])
    assert envelope["status"] == "failed"
    assert envelope["error"]["code"] == "invariant_violation"


def test_op_job_lifecycle_and_result(client):
    r = client.post("/projects/project/ops/group", json={})
    assert r.status_code == 202
    envelope = r.json()
    assert envelope["status"] in ("queued", "running")
    final = wait_job(client, "project", envelope["job_id"])
    assert final["status"] == "done"
    assert final["result_ref"]  # list of scenes
    assert client.handle.session.project.active().scenes


def test_op_submission_rejects_stale_revision(client):
    rev = client.get("/projects/project").json()["revision"]
    client.post(
        "/projects/project/mutations",
        json={"mutation": {"kind": "set_story_context", "params": {"text": "bump"}}},
    )
    r = client.post("/projects/project/ops/group", json={"revision": rev})
    assert r.status_code == 409


def test_unknown_op_404(client):
    assert client.post("/projects/project/ops/frobnicate", json={}).status_code == 404


def test_contextual_scene_on_non_adjacent_scenes_422(client):
    from .conftest import make_scenes

    # build three scenes directly, then ask for a gap between non-adjacent ones
    session = client.handle.session
    # shots already grouped? build from pool
    if len(session.project.active().scenes) < 3:
        make_scenes(session, [1, 1, 1])
    order = session.project.active().scenes
    r = client.post(
        "/projects/project/ops/contextual-scene",
        json={"params": {"prev_scene_id": order[0], "next_scene_id": order[2]}},
    )
    envelope = wait_job(client, "project", r.json()["job_id"])
    assert envelope["status"] == "failed"
    assert envelope["error"]["invariant"] == "adjacent-scenes"


def test_suggestions_route_and_dislike(client):
    r = client.post("/projects/project/ops/suggest-story", json={})
    envelope = wait_job(client, "project", r.json()["job_id"])
    assert envelope["status"] == "done"
    listed = client.get("/projects/project/suggestions").json()["suggestions"]
    assert 3 <= len(listed) <= 5
    sid = listed[0]["suggestion_id"]
    assert client.post(f"/projects/project/suggestions/{sid}/dislike").status_code == 200
    assert listed[0]["text"] in client.handle.session.project.disliked_suggestions


def test_asset_route_serves_bytes_with_checksum_etag(client):
    project = client.handle.session.project
    asset_id, ref = next(iter(project.assets.items()))
    r = client.get(f"/projects/project/assets/{asset_id}")
    assert r.status_code == 200
    assert r.headers["etag"] == ref.checksum
    assert len(r.content) > 0


def test_compile_route_returns_edl(client):
    r = client.post("/projects/project/ops/group", json={})
    wait_job(client, "project", r.json()["job_id"])
    scene_id = client.handle.session.project.active().scenes[0]
    r = client.post("/projects/project/compile", json={"scene_id": scene_id})
    assert r.status_code == 200
    edl = r.json()["edl"]
    assert edl["total_duration_s"] > 0


def test_event_stream_orders_job_lifecycle_and_replays(live):
    base, handle = live
    r = httpx.post(f"{base}/projects/project/ops/group", json={})
    assert r.status_code == 202
    job_id = r.json()["job_id"]
    deadline = time.monotonic() + 10
    while httpx.get(f"{base}/projects/project/jobs/{job_id}").json()["status"] not in ("done", "failed"):
        assert time.monotonic() < deadline
        time.sleep(0.01)
    httpx.post(
        f"{base}/projects/project/mutations",
        json={"mutation": {"kind": "set_story_context", "params": {"text": "streamed"}}},
    )

    expected = len(handle.history)
    events = read_events(base, 0, expected)
    ids = [e["id"] for e in events]
    assert ids == sorted(ids)
    job_events = [e for e in events if e["type"] == "job"]
    statuses = [e["status"] for e in job_events]
    assert statuses.index("queued") < statuses.index("running") < statuses.index("done")
    # mutation events carry the project revision in log order
    revisions = [e["revision"] for e in events if e["type"] == "mutation"]
    assert revisions == sorted(revisions)

    # reconnect with since=N replays exactly the tail, same order
    cut = events[len(events) // 2]["id"]
    expected_tail = [e["id"] for e in events if e["id"] > cut]
    tail = read_events(base, cut, len(expected_tail))
    assert [e["id"] for e in tail] == expected_tail


def test_two_subscribers_see_identical_order(live):
    base, handle = live
    httpx.post(f"{base}/projects/project/ops/group", json={})
    time.sleep(0.3)
    count = len(handle.history)
    a = read_events(base, 0, count)
    b = read_events(base, 0, count)
    assert [e["id"] for e in a] == [e["id"] for e in b]
    assert a == b


def test_live_events_push_after_subscribe(live):
    base, handle = live
    got: list[dict] = []
    ready = threading.Event()

    def listen():
        with httpx.stream("GET", f"{base}/projects/project/events?since=0", timeout=10) as r:
            ready.set()
            for line in r.iter_lines():
                if line.startswith("data: "):
                    got.append(json.loads(line[6:]))
                    if any(e.get("kind") == "set_story_context" for e in got):
                        return

    t = threading.Thread(target=listen, daemon=True)
    t.start()
    ready.wait(5)
    time.sleep(0.1)
    httpx.post(
        f"{base}/projects/project/mutations",
        json={"mutation": {"kind": "set_story_context", "params": {"text": "live"}}},
    )
    t.join(timeout=10)
    assert any(e.get("kind") == "set_story_context" for e in got)


def test_version_duplicate_route(client):
    r = client.post(
        f"/projects/project/versions/{client.handle.session.project.active_version}/duplicate",
        json={"name": "Copy"},
    )
    assert r.status_code == 200
    assert r.json()["version"]["name"] == "Copy"
    assert len(client.handle.session.project.versions) == 2


def test_every_pipeline_op_has_a_route():
    expected = {
        "describe",
        "describe-shot",
        "describe-scene",
        "group",
        "sequence",
        "contextual-scene",
        "variation",
        "compare",
        "suggest-story",
        "suggest-scene",
        "sync-notes",
        "refine",
        "expand-scene",
        "contextual-shot",
        "image-variations",
        "video-prompt",
        "animate",
        "align",
        "narrate",
        "music",
    }
    assert expected <= set(OPS)
