"""Async job execution for the HTTP service.

Pipeline operations submitted over HTTP return immediately with a
JobEnvelope; a bounded worker pool runs them (provider concurrency is
additionally capped by the hub's semaphore) and every status transition is
pushed to the event stream.  Terminal envelopes are immutable.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Optional

from .errors import InvariantViolation, StoryweaveError, UnknownId

TERMINAL = ("done", "failed")


@dataclass
class JobEnvelope:
    job_id: str
    kind: str
    status: str = "queued"  # queued | running | done | failed
    progress: Optional[float] = None
    result_ref: Any = None
    error: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "kind": self.kind,
            "status": self.status,
            "progress": self.progress,
            "result_ref": self.result_ref,
            "error": self.error,
        }


class JobManager:
    def __init__(self, max_workers: int = 4, on_event: Optional[Callable[[dict], None]] = None) -> None:
        self._pool = ThreadPoolExecutor(max_workers=max_workers)
        self._jobs: dict[str, JobEnvelope] = {}
        self._lock = threading.Lock()
        self._seq = 0
        self._on_event = on_event or (lambda event: None)
        self.running = 0
        self.max_running = 0

    def submit(self, kind: str, fn: Callable[[], Any]) -> JobEnvelope:
        with self._lock:
            self._seq += 1
            envelope = JobEnvelope(job_id=f"task-{self._seq:04d}", kind=kind)
            self._jobs[envelope.job_id] = envelope
        self._emit(envelope)
        self._pool.submit(self._run, envelope, fn)
        return envelope

    def get(self, job_id: str) -> JobEnvelope:
        try:
            return self._jobs[job_id]
        except KeyError:
            raise UnknownId(f"unknown job: {job_id}") from None

    def _transition(self, envelope: JobEnvelope, **changes) -> None:
        with self._lock:
            if envelope.status in TERMINAL:
                raise InvariantViolation("terminal-job", f"job {envelope.job_id} already {envelope.status}")
            for key, value in changes.items():
                setattr(envelope, key, value)
        self._emit(envelope)

    def _emit(self, envelope: JobEnvelope) -> None:
        self._on_event({"type": "job", **envelope.to_dict()})

    def _run(self, envelope: JobEnvelope, fn: Callable[[], Any]) -> None:
        self._transition(envelope, status="running")
        with self._lock:
            self.running += 1
            self.max_running = max(self.max_running, self.running)
        try:
            result = fn()
            with self._lock:
                self.running -= 1
            self._transition(envelope, status="done", result_ref=result, progress=1.0)
        except StoryweaveError as exc:
            with self._lock:
                self.running -= 1
            self._transition(envelope, status="failed", error=exc.to_dict())
        except Exception as exc:  # non-domain failure: keep the envelope honest
            with self._lock:
                self.running -= 1
            self._transition(envelope, status="failed", error={"code": "internal", "message": str(exc)})

    def shutdown(self) -> None:
        self._pool.shutdown(wait=False, cancel_futures=True)
