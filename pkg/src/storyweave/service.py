"""HTTP JSON API and server-sent event stream over open projects.

Every pipeline operation has a POST route returning 202 + JobEnvelope;
mutations are optimistic-concurrency checked against the project revision
(stale writes get 409); the event stream delivers job transitions and
mutation events in order with replay from a client-supplied last id.
"""

from __future__ import annotations

import json
import queue
import threading
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, JSONResponse, StreamingResponse

from . import alignment, pipelines
from .errors import (
    IntegrityError,
    InvariantViolation,
    ProviderError,
    StaleRevision,
    StoryweaveError,
    UnknownId,
)
from .jobs import JobManager
from .mutations import Mutation, duplicate_version
from .session import Session


class ProjectHandle:
    """One open project: session, unified event history, subscribers, jobs."""

    def __init__(self, session: Session) -> None:
        self.session = session
        self.history: list[dict] = []
        self._subscribers: list[queue.Queue] = []
        self._lock = threading.Lock()
        self.jobs = JobManager(
            max_workers=session.config.max_parallel_calls, on_event=self._job_event
        )
        session.subscribe(self._mutation_event)

    @property
    def project_id(self) -> str:
        return self.session.project.project_id

    def _mutation_event(self, event: dict) -> None:
        self.emit(event)

    def _job_event(self, event: dict) -> None:
        event = {**event, "revision": self.session.revision}
        self.emit(event)

    def emit(self, event: dict) -> None:
        with self._lock:
            event = {**event, "id": len(self.history) + 1}
            self.history.append(event)
            subscribers = list(self._subscribers)
        for q in subscribers:
            q.put(event)

    def subscribe(self, since: int = 0) -> tuple[list[dict], queue.Queue]:
        """Atomically snapshot the replay backlog and start a live queue, so
        no event is dropped or duplicated across the boundary."""
        q: queue.Queue = queue.Queue()
        with self._lock:
            replay = [e for e in self.history if e["id"] > since]
            self._subscribers.append(q)
        return replay, q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def check_revision(self, expected: Optional[int]) -> None:
        if expected is not None and expected != self.session.revision:
            raise StaleRevision(
                f"expected revision {expected}, project is at {self.session.revision}",
                expected=expected,
                actual=self.session.revision,
            )

    def save(self) -> None:
        self.session.save()


def _error_response(exc: StoryweaveError) -> JSONResponse:
    status = 500
    if isinstance(exc, UnknownId):
        status = 404
    elif isinstance(exc, StaleRevision):
        status = 409
    elif isinstance(exc, ProviderError):
        status = 502
    elif isinstance(exc, (InvariantViolation, IntegrityError, StoryweaveError)):
        status = 422
    return JSONResponse(status_code=status, content={"error": exc.to_dict()})


# pipeline ops exposed as async job routes: name -> callable(session, **params)
OPS: dict[str, Any] = {
    "describe": lambda s, **p: pipelines.describe_pending(s, **p),
    "describe-shot": lambda s, **p: pipelines.describe_shot(s, **p),
    "describe-scene": lambda s, **p: pipelines.describe_scene(s, **p).to_dict(),
    "group": lambda s, **p: [sc.to_dict() for sc in pipelines.group_shots_into_scenes(s, **p)],
    "sequence": lambda s, **p: pipelines.sequence_scenes(s).to_dict(),
    "contextual-scene": lambda s, **p: pipelines.add_contextual_scene(s, **p).to_dict(),
    "variation": lambda s, **p: pipelines.create_story_variation(s, **p).to_dict(),
    "compare": lambda s, **p: pipelines.compare_story_variations(s, **p).to_dict(),
    "suggest-story": lambda s, **p: [x.to_dict() for x in pipelines.generate_story_suggestions(s, **p)],
    "suggest-scene": lambda s, **p: [x.to_dict() for x in pipelines.generate_scene_suggestions(s, **p)],
    "sync-notes": lambda s, **p: pipelines.sync_notes_to_script(s, **p),
    "refine": lambda s, **p: pipelines.refine_text(s, **p),
    "expand-scene": lambda s, **p: pipelines.sequence_visuals_in_scene(s, **p).to_dict(),
    "contextual-shot": lambda s, **p: pipelines.add_contextual_shot(s, **p).to_dict(),
    "image-variations": lambda s, **p: pipelines.generate_image_variations(s, **p).to_dict(),
    "video-prompt": lambda s, **p: pipelines.suggest_video_prompt(s, **p),
    "animate": lambda s, **p: pipelines.generate_video_variations(s, **p).to_dict(),
    "align": lambda s, **p: [c.to_dict() for c in alignment.auto_align(s, **p)],
    "narrate": lambda s, **p: pipelines.generate_narration(s, **p).to_dict(),
    "music": lambda s, **p: pipelines.generate_music(s, **p),
}


def create_app(handles: dict[str, ProjectHandle]) -> FastAPI:
    app = FastAPI(title="storyweave", version="0.1.0")

    @app.exception_handler(StoryweaveError)
    async def handle_domain_error(request: Request, exc: StoryweaveError):
        return _error_response(exc)

    def handle(project_id: str) -> ProjectHandle:
        try:
            return handles[project_id]
        except KeyError:
            raise UnknownId(f"unknown project: {project_id}") from None

    @app.get("/projects")
    def list_projects():
        return {
            "projects": [
                {"project_id": pid, "revision": h.session.revision} for pid, h in handles.items()
            ]
        }

    @app.get("/projects/{pid}")
    def get_project(pid: str):
        h = handle(pid)
        return {"revision": h.session.revision, "project": h.session.project.to_dict()}

    @app.post("/projects/{pid}/mutations")
    async def post_mutation(pid: str, request: Request):
        h = handle(pid)
        body = await request.json()
        if "mutation" not in body:
            return JSONResponse(status_code=400, content={"error": {"code": "bad_request", "message": "missing mutation"}})
        h.check_revision(body.get("revision"))
        record = h.session.apply(Mutation.from_dict(body["mutation"]))
        h.save()
        return {"revision": record.seq, "project": h.session.project.to_dict()}

    @app.post("/projects/{pid}/undo")
    async def post_undo(pid: str, request: Request):
        h = handle(pid)
        body = await request.json() if await request.body() else {}
        h.check_revision(body.get("revision"))
        record = h.session.undo()
        h.save()
        return {"revision": record.seq, "project": h.session.project.to_dict()}

    @app.post("/projects/{pid}/redo")
    async def post_redo(pid: str, request: Request):
        h = handle(pid)
        body = await request.json() if await request.body() else {}
        h.check_revision(body.get("revision"))
        record = h.session.redo()
        h.save()
        return {"revision": record.seq, "project": h.session.project.to_dict()}

    @app.post("/projects/{pid}/ingest")
    async def post_ingest(pid: str, request: Request):
        h = handle(pid)
        body = await request.json()
        report = h.session.store.ingest(h.session.project, h.session.apply, body.get("paths", []))
        h.save()
        return {"revision": h.session.revision, "report": report.to_dict()}

    @app.post("/projects/{pid}/versions/{vid}/duplicate")
    async def post_duplicate(pid: str, vid: str, request: Request):
        h = handle(pid)
        body = await request.json()
        version = duplicate_version(h.session.log, h.session.project, vid, body.get("name", "Copy"))
        h.save()
        return {"revision": h.session.revision, "version": version.to_dict()}

    @app.post("/projects/{pid}/versions/{vid}/activate")
    async def post_activate(pid: str, vid: str, request: Request):
        h = handle(pid)
        body = await request.json() if await request.body() else {}
        h.check_revision(body.get("revision"))
        h.session.apply(Mutation("set_active_version", {"version_id": vid}))
        h.save()
        return {"revision": h.session.revision}

    @app.post("/projects/{pid}/ops/{op}", status_code=202)
    async def post_op(pid: str, op: str, request: Request):
        h = handle(pid)
        if op not in OPS:
            raise UnknownId(f"unknown operation: {op}")
        body = await request.json() if await request.body() else {}
        h.check_revision(body.pop("revision", None))
        params = body.get("params", {})
        fn = OPS[op]

        def run():
            result = fn(h.session, **params)
            h.save()
            return result

        envelope = h.jobs.submit(op, run)
        return envelope.to_dict()

    @app.get("/projects/{pid}/jobs/{job_id}")
    def get_job(pid: str, job_id: str):
        return handle(pid).jobs.get(job_id).to_dict()

    @app.post("/projects/{pid}/proposals/scene/accept")
    async def accept_scene(pid: str, request: Request):
        h = handle(pid)
        body = await request.json()
        h.check_revision(body.get("revision"))
        proposal = pipelines.NewSceneProposal.from_dict(body["proposal"])
        scene = pipelines.accept_scene_proposal(h.session, proposal)
        h.save()
        return {"revision": h.session.revision, "scene": scene.to_dict()}

    @app.post("/projects/{pid}/proposals/shot/accept")
    async def accept_shot(pid: str, request: Request):
        h = handle(pid)
        body = await request.json()
        h.check_revision(body.get("revision"))
        proposal = pipelines.ShotProposal.from_dict(body["proposal"])
        shot = pipelines.accept_shot_proposal(h.session, proposal, body.get("chosen", 0))
        h.save()
        return {"revision": h.session.revision, "shot": shot.to_dict()}

    @app.post("/projects/{pid}/variations/video/apply")
    async def apply_video(pid: str, request: Request):
        h = handle(pid)
        body = await request.json()
        h.check_revision(body.get("revision"))
        result = pipelines.VideoVariationResult(**body["result"])
        shot = pipelines.apply_video_variation(h.session, result, body.get("chosen", 0))
        h.save()
        return {"revision": h.session.revision, "shot": shot.to_dict()}

    @app.post("/projects/{pid}/variations/image/apply")
    async def apply_image(pid: str, request: Request):
        h = handle(pid)
        body = await request.json()
        h.check_revision(body.get("revision"))
        result = pipelines.ImageVariationResult(**body["result"])
        shot = pipelines.select_image_variation(h.session, result, body["chosen"])
        h.save()
        return {"revision": h.session.revision, "shot": shot.to_dict()}

    @app.get("/projects/{pid}/suggestions")
    def get_suggestions(pid: str):
        h = handle(pid)
        return {"suggestions": [s.to_dict() for s in h.session.project.suggestions]}

    @app.post("/projects/{pid}/suggestions/{sid}/dislike")
    def post_dislike(pid: str, sid: str):
        h = handle(pid)
        pipelines.dislike_suggestion(h.session, sid)
        h.save()
        return {"revision": h.session.revision}

    @app.post("/projects/{pid}/compile")
    async def post_compile(pid: str, request: Request):
        from . import compiler

        h = handle(pid)
        body = await request.json() if await request.body() else {}
        project = h.session.project
        if body.get("story"):
            edl = compiler.compile_story(project, body.get("version_id"))
        else:
            scene = project.scene(body["scene_id"])
            edl = compiler.build_edl(project, scene)
        return {"revision": h.session.revision, "edl": edl.to_dict()}

    @app.post("/projects/{pid}/assets")
    async def upload_asset(pid: str, request: Request):
        """Register client-produced bytes (e.g. a flattened annotation
        raster) as a content-addressed asset."""
        import base64

        h = handle(pid)
        body = await request.json()
        data = base64.b64decode(body["data_b64"])
        suffix = body.get("suffix", ".png")
        ref = h.session.store.register_bytes(h.session.project, h.session.apply, data, suffix)
        h.save()
        return {"revision": h.session.revision, "asset": ref.to_dict()}

    @app.get("/projects/{pid}/assets/{asset_id}")
    def get_asset(pid: str, asset_id: str):
        h = handle(pid)
        ref = h.session.project.asset(asset_id)
        path = h.session.store.asset_path(ref)
        media_types = {".png": "image/png", ".jpg": "image/jpeg", ".mp4": "video/mp4", ".wav": "audio/wav"}
        return FileResponse(
            path,
            media_type=media_types.get(path.suffix, "application/octet-stream"),
            headers={"ETag": ref.checksum},
        )

    @app.get("/projects/{pid}/events")
    async def get_events(pid: str, request: Request, since: int = 0):
        h = handle(pid)

        async def stream():
            replay, q = h.subscribe(since)
            try:
                for event in replay:
                    yield _sse(event)
                import anyio

                while True:
                    if await request.is_disconnected():
                        return
                    try:
                        event = q.get_nowait()
                    except queue.Empty:
                        await anyio.sleep(0.05)
                        yield ": keep-alive\n\n"
                        continue
                    yield _sse(event)
            finally:
                h.unsubscribe(q)

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app


def _sse(event: dict) -> str:
    return f"id: {event['id']}\ndata: {json.dumps(event, sort_keys=True)}\n\n"


def serve(project_root: str | Path, host: str = "127.0.0.1", port: int = 8787, **config_overrides):
    """Open the project and serve the API (used by the CLI)."""
    import uvicorn

    session = Session.open(project_root, **config_overrides)
    handles = {session.project.project_id: ProjectHandle(session)}
    app = create_app(handles)
    uvicorn.run(app, host=host, port=port, log_level="warning")
