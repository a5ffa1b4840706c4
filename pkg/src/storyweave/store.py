"""Persistence, asset ingestion, and the generation-job audit trail.

On-disk layout::

    <root>/project.json    canonical project document (schema_version field)
    <root>/assets/         content-addressed media files (checksum-prefixed)
    <root>/events.log      JSONL mutation log (append-only)
    <root>/jobs.log        JSONL audit of every GenerationJob
    <root>/config.json     provider/render configuration
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import media
from .errors import IntegrityError, SchemaMismatch
from .model import (
    SCHEMA_VERSION,
    AssetRef,
    Project,
    Scene,
    Shot,
    StoryVersion,
    Suggestion,
    canonical_json,
    validate_project,
)
from .mutations import Mutation, MutationLog, batch, plan_ids

PROJECT_FILE = "project.json"
ASSET_DIR = "assets"
EVENTS_FILE = "events.log"
JOBS_FILE = "jobs.log"

# canvas auto-layout grid for newly ingested shots
_GRID_COLS = 6
_GRID_DX = 180.0
_GRID_DY = 140.0


@dataclass
class GenerationJob:
    """Audit record of one pipeline invocation and its provider calls."""

    job_id: str
    kind: str
    status: str = "queued"  # queued | running | done | failed
    prompts: dict = field(default_factory=dict)
    intermediates: dict = field(default_factory=dict)
    output_asset_ids: list[str] = field(default_factory=list)
    error: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "kind": self.kind,
            "status": self.status,
            "prompts": self.prompts,
            "intermediates": self.intermediates,
            "output_asset_ids": self.output_asset_ids,
            "error": self.error,
            "extra": self.extra,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GenerationJob":
        return cls(
            job_id=data["job_id"],
            kind=data["kind"],
            status=data.get("status", "queued"),
            prompts=data.get("prompts", {}),
            intermediates=data.get("intermediates", {}),
            output_asset_ids=data.get("output_asset_ids", []),
            error=data.get("error"),
            extra=data.get("extra", {}),
        )


@dataclass
class IngestReport:
    added: list[str] = field(default_factory=list)  # asset ids
    skipped: list[tuple[str, str]] = field(default_factory=list)  # (path, reason)
    describe_jobs: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "added": list(self.added),
            "skipped": [list(pair) for pair in self.skipped],
            "describe_jobs": list(self.describe_jobs),
        }


class ProjectStore:
    """Owns one project directory: documents, assets, and audit logs."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.asset_dir = self.root / ASSET_DIR
        self._jobs: dict[str, GenerationJob] = {}
        self._jobs_loaded = False

    # -- paths

    @property
    def project_path(self) -> Path:
        return self.root / PROJECT_FILE

    @property
    def events_path(self) -> Path:
        return self.root / EVENTS_FILE

    @property
    def jobs_path(self) -> Path:
        return self.root / JOBS_FILE

    def asset_path(self, ref: AssetRef) -> Path:
        return self.root / ref.uri

    # -- lifecycle

    def init(self, project: Project) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        self.asset_dir.mkdir(exist_ok=True)
        self.save(project, MutationLog())

    def save(self, project: Project, log: Optional[MutationLog] = None) -> Path:
        validate_project(project)
        self.root.mkdir(parents=True, exist_ok=True)
        self.asset_dir.mkdir(exist_ok=True)
        _atomic_write(self.project_path, canonical_json(project.to_dict()))
        if log is not None:
            lines = "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in log.to_lines())
            _atomic_write(self.events_path, lines)
        return self.project_path

    def load(self) -> tuple[Project, MutationLog]:
        if not self.project_path.exists():
            raise IntegrityError(f"no project document at {self.project_path}")
        try:
            data = json.loads(self.project_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise IntegrityError(f"project.json is not valid JSON: {exc}") from exc
        project = parse_project(data)
        validate_project(project)
        self._check_generation_audit(project)
        log = MutationLog()
        if self.events_path.exists():
            lines = []
            for i, line in enumerate(self.events_path.read_text(encoding="utf-8").splitlines()):
                if not line.strip():
                    continue
                try:
                    lines.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise IntegrityError(f"events.log line {i + 1} is not valid JSON") from exc
            log = MutationLog.from_lines(lines)
        return project, log

    def _check_generation_audit(self, project: Project) -> None:
        if not self.jobs_path.exists():
            generated = [s.shot_id for s in project.shots.values() if s.generation is not None]
            if generated:
                raise IntegrityError(
                    f"shots[{generated[0]}].generation: jobs.log missing for audited job", id=generated[0]
                )
            return
        jobs = self.jobs()
        for shot in project.shots.values():
            if shot.generation is None:
                continue
            job = jobs.get(shot.generation.job_id)
            if job is None:
                raise IntegrityError(
                    f"shots[{shot.shot_id}].generation.job_id: unknown job {shot.generation.job_id}",
                    id=shot.generation.job_id,
                )
            if job.status != "done":
                raise IntegrityError(
                    f"shots[{shot.shot_id}].generation.job_id: job {job.job_id} not completed",
                    id=job.job_id,
                )

    # -- asset registry

    def register_bytes(
        self,
        project: Project,
        apply,
        data: bytes,
        suffix: str,
    ) -> AssetRef:
        """Write content-addressed bytes into assets/ and register them via
        the serialized mutation path.

        Returns the existing ref when the checksum is already registered.
        """
        checksum = hashlib.sha256(data).hexdigest()
        existing = project.asset_by_checksum(checksum)
        if existing is not None:
            return existing
        name = f"{checksum[:12]}{suffix}"
        path = self.asset_dir / name
        self.asset_dir.mkdir(parents=True, exist_ok=True)
        if not path.exists():
            path.write_bytes(data)
        info = media.probe(path)
        ref = AssetRef(
            asset_id=f"asset-{checksum[:12]}",
            kind=info.kind,
            uri=f"{ASSET_DIR}/{name}",
            checksum=checksum,
            duration_s=info.duration_s,
            width=info.width,
            height=info.height,
        )
        apply(Mutation("register_asset", {"asset": ref.to_dict()}))
        return ref

    def read_asset(self, project: Project, asset_id: str) -> bytes:
        ref = project.asset(asset_id)
        return self.asset_path(ref).read_bytes()

    # -- ingestion

    def ingest(self, project: Project, apply, paths: list[str | Path]) -> IngestReport:
        """Copy supported media into assets/, register each as an ungrouped
        captured shot, and queue a describe job per new shot.  Per-file
        failures are reported in ``skipped`` and never abort the batch."""
        report = IngestReport()
        for raw in paths:
            src = Path(raw)
            suffix = src.suffix.lower()
            if suffix not in media.SUPPORTED_SUFFIXES:
                report.skipped.append((str(src), f"unsupported extension {suffix or '(none)'}"))
                continue
            try:
                data = src.read_bytes()
            except OSError as exc:
                report.skipped.append((str(src), f"unreadable: {exc}"))
                continue
            checksum = hashlib.sha256(data).hexdigest()
            if project.asset_by_checksum(checksum) is not None:
                report.skipped.append((str(src), "duplicate checksum"))
                continue
            name = f"{checksum[:12]}{suffix}"
            dest = self.asset_dir / name
            self.asset_dir.mkdir(parents=True, exist_ok=True)
            if not dest.exists():
                shutil.copyfile(src, dest)
            try:
                info = media.probe(dest)
            except Exception as exc:
                dest.unlink(missing_ok=True)
                report.skipped.append((str(src), f"probe failed: {exc}"))
                continue
            ref = AssetRef(
                asset_id=f"asset-{checksum[:12]}",
                kind=info.kind,
                uri=f"{ASSET_DIR}/{name}",
                checksum=checksum,
                duration_s=info.duration_s,
                width=info.width,
                height=info.height,
            )
            if info.kind == "audio":
                # audio is registered for narration/music use but is not a shot
                apply(Mutation("register_asset", {"asset": ref.to_dict()}))
                report.added.append(ref.asset_id)
                continue
            (shot_id,), seq_step = plan_ids(project, ["shot"])
            n = len(project.shots)
            shot = Shot(
                shot_id=shot_id,
                asset_id=ref.asset_id,
                provenance="captured",
                canvas_pos=((n % _GRID_COLS) * _GRID_DX, (n // _GRID_COLS) * _GRID_DY),
            )
            apply(
                batch(
                    [
                        seq_step,
                        Mutation("register_asset", {"asset": ref.to_dict()}),
                        Mutation("create_shot", {"shot": shot.to_dict()}),
                    ]
                )
            )
            report.added.append(ref.asset_id)
            job = self.new_job("describe_shot", extra={"shot_id": shot_id})
            report.describe_jobs.append(job.job_id)
        return report

    # -- generation-job audit

    def jobs(self) -> dict[str, GenerationJob]:
        if not self._jobs_loaded:
            self._jobs = {}
            if self.jobs_path.exists():
                for line in self.jobs_path.read_text(encoding="utf-8").splitlines():
                    if not line.strip():
                        continue
                    job = GenerationJob.from_dict(json.loads(line))
                    self._jobs[job.job_id] = job  # later lines supersede earlier
            self._jobs_loaded = True
        return self._jobs

    def new_job(self, kind: str, **fields) -> GenerationJob:
        jobs = self.jobs()
        job = GenerationJob(job_id=f"job-{len(jobs) + 1:04d}", kind=kind, **fields)
        self.append_job(job)
        return job

    def append_job(self, job: GenerationJob) -> None:
        jobs = self.jobs()
        jobs[job.job_id] = job
        self.root.mkdir(parents=True, exist_ok=True)
        with self.jobs_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(job.to_dict(), sort_keys=True) + "\n")

    def update_job(self, job_id: str, **changes) -> GenerationJob:
        jobs = self.jobs()
        if job_id not in jobs:
            raise IntegrityError(f"unknown generation job: {job_id}", id=job_id)
        updated = GenerationJob.from_dict({**jobs[job_id].to_dict(), **changes})
        self.append_job(updated)
        return updated

    def queued_describe_job(self, shot_id: str) -> Optional[GenerationJob]:
        for job in self.jobs().values():
            if job.kind == "describe_shot" and job.status == "queued" and job.extra.get("shot_id") == shot_id:
                return job
        return None


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def parse_project(data: dict) -> Project:
    """Build a Project from a JSON document, reporting the failing field on
    malformed input."""
    if not isinstance(data, dict):
        raise IntegrityError("project document must be a JSON object")
    declared = data.get("schema_version")
    if declared != SCHEMA_VERSION:
        raise SchemaMismatch(
            f"schema_version {declared!r} is not supported (expected {SCHEMA_VERSION})",
            found=declared,
            expected=SCHEMA_VERSION,
        )
    if "project_id" not in data:
        raise IntegrityError("missing field: project_id")

    versions = []
    for i, item in enumerate(data.get("versions", [])):
        try:
            versions.append(StoryVersion.from_dict(item))
        except (KeyError, TypeError) as exc:
            raise IntegrityError(f"versions[{i}]: malformed ({exc})") from exc
    scenes = {}
    for key, item in data.get("scenes", {}).items():
        try:
            scenes[key] = Scene.from_dict(item)
        except (KeyError, TypeError) as exc:
            raise IntegrityError(f"scenes[{key}]: malformed ({exc})", id=key) from exc
    shots = {}
    for key, item in data.get("shots", {}).items():
        try:
            shots[key] = Shot.from_dict(item)
        except (KeyError, TypeError) as exc:
            raise IntegrityError(f"shots[{key}]: malformed ({exc})", id=key) from exc
    assets = {}
    for key, item in data.get("assets", {}).items():
        try:
            assets[key] = AssetRef.from_dict(item)
        except (KeyError, TypeError) as exc:
            raise IntegrityError(f"assets[{key}]: malformed ({exc})", id=key) from exc
    suggestions = []
    for i, item in enumerate(data.get("suggestions", [])):
        try:
            suggestions.append(Suggestion.from_dict(item))
        except (KeyError, TypeError) as exc:
            raise IntegrityError(f"suggestions[{i}]: malformed ({exc})") from exc

    return Project(
        project_id=data["project_id"],
        story_context=data.get("story_context", ""),
        versions=versions,
        active_version=data.get("active_version", ""),
        scenes=scenes,
        shots=shots,
        assets=assets,
        suggestions=suggestions,
        disliked_suggestions=list(data.get("disliked_suggestions", [])),
        schema_version=declared,
        id_seq=data.get("id_seq", 0),
    )
