"""Request/response types, the repair loop, and the concurrency-bounded hub."""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from typing import Any, Optional

import jsonschema

from .. import config as config_mod
from ..errors import (
    EmptyScript,
    InvalidSchema,
    InvariantViolation,
    PartialFailure,
    ProviderTimeout,
    SchemaValidationExhausted,
)
from ..model import AssetRef, Project
from ..store import ProjectStore


@dataclass
class Part:
    """One element of a multimodal user prompt."""

    text: Optional[str] = None
    image: Optional[str] = None  # asset_id
    frame_time_s: Optional[float] = None  # frame sample for video assets
    max_edge: Optional[int] = None  # downscale bound applied before sending

    @classmethod
    def of_text(cls, text: str) -> "Part":
        return cls(text=text)

    @classmethod
    def of_image(cls, asset_id: str, frame_time_s: float | None = None, max_edge: int = 512) -> "Part":
        return cls(image=asset_id, frame_time_s=frame_time_s, max_edge=max_edge)


@dataclass
class StructuredRequest:
    system_prompt: str
    user_parts: list[Part]
    schema: dict
    creativity: float = config_mod.CREATIVITY_IDEATION
    max_retries: int = 2


@dataclass
class StructuredResult:
    value: Any
    retries_used: int
    raw: str


@dataclass
class ImageGenRequest:
    prompt: str
    n: int = 1
    seed: Optional[int] = None
    base_image: Optional[str] = None  # asset_id, for edits
    width: int = 640
    height: int = 360


@dataclass
class VideoGenRequest:
    prompt: str
    keyframe: str  # asset_id of the CLEAN (unannotated) image
    n: int = 2
    seed: Optional[int] = None
    duration_hint_s: float = 4.0


@dataclass
class SpeechRequest:
    script: str
    voice: str = "narrator"
    n: int = 1
    seed: Optional[int] = None


@dataclass
class MusicRequest:
    prompt: str
    duration_s: float = 8.0
    n: int = 1
    seed: Optional[int] = None


@dataclass
class ProviderResult:
    outputs: list  # asset ids (media) or parsed values
    latency_ms: float
    provider_name: str
    raw_echo: str = ""


@dataclass
class RequestContext:
    """Asset resolution handed to raw providers.

    The mock only ever touches checksums and dimensions; the HTTP provider
    loads bytes (downscaled per Part.max_edge) when attaching images.
    """

    project: Project
    store: Optional[ProjectStore] = None

    def ref(self, asset_id: str) -> AssetRef:
        return self.project.asset(asset_id)

    def read(self, asset_id: str) -> bytes:
        if self.store is None:
            raise InvariantViolation("no-store", "context has no asset store attached")
        return self.store.read_asset(self.project, asset_id)

    def part_payload(self, part: Part) -> dict:
        if part.text is not None:
            return {"text": part.text}
        ref = self.ref(part.image)
        payload: dict = {"image_checksum": ref.checksum, "max_edge": part.max_edge}
        if part.frame_time_s is not None:
            payload["frame_time_s"] = part.frame_time_s
        return payload


class BaseProvider:
    """Raw provider interface; all byte-level, no project knowledge."""

    name = "base"

    def complete(self, req: StructuredRequest, ctx: RequestContext) -> str:
        raise NotImplementedError

    def generate_images(self, req: ImageGenRequest, ctx: RequestContext) -> list[bytes]:
        raise NotImplementedError

    def generate_videos(self, req: VideoGenRequest, ctx: RequestContext) -> list[bytes]:
        raise NotImplementedError

    def synthesize_speech(self, req: SpeechRequest, ctx: RequestContext) -> list[bytes]:
        raise NotImplementedError

    def synthesize_music(self, req: MusicRequest, ctx: RequestContext) -> list[bytes]:
        raise NotImplementedError


class RawPartialFailure(Exception):
    """Raised by raw providers when only some of n outputs materialized."""

    def __init__(self, outputs: list[bytes], errors: list[str]):
        super().__init__(f"{len(errors)} of {len(outputs) + len(errors)} outputs failed")
        self.outputs = outputs
        self.errors = errors


def complete_structured(provider: BaseProvider, req: StructuredRequest, ctx: RequestContext) -> StructuredResult:
    """Run the structured call with schema validation and bounded repair.

    On validation failure the provider is re-invoked with the validation
    error appended, at most ``max_retries`` additional times.
    """
    try:
        validator_cls = jsonschema.validators.validator_for(req.schema)
        validator_cls.check_schema(req.schema)
        validator = validator_cls(req.schema)
    except jsonschema.SchemaError as exc:
        raise InvalidSchema(f"request schema is not well-formed: {exc.message}") from exc
    for part in req.user_parts:
        if part.image is not None:
            ctx.ref(part.image)  # raises UnknownId for dangling references

    attempt = 0
    current = req
    raw = ""
    while True:
        raw = provider.complete(current, ctx)
        try:
            value = json.loads(raw)
            validator.validate(value)
            return StructuredResult(value=value, retries_used=attempt, raw=raw)
        except (json.JSONDecodeError, jsonschema.ValidationError) as exc:
            attempt += 1
            if attempt > req.max_retries:
                raise SchemaValidationExhausted(
                    f"structured output failed validation after {req.max_retries} retries: {exc}",
                    last_raw=raw,
                ) from exc
            feedback = Part.of_text(
                f"The previous response was invalid: {exc}. "
                "Respond again with JSON that matches the schema exactly."
            )
            current = StructuredRequest(
                system_prompt=req.system_prompt,
                user_parts=list(current.user_parts) + [feedback],
                schema=req.schema,
                creativity=req.creativity,
                max_retries=req.max_retries,
            )


class ProviderHub:
    """Session-scoped facade: bounds concurrency, registers outputs, probes.

    All provider calls are blocking from the caller's view; fan-out is owned
    by the pipelines and every in-flight call holds the global semaphore.
    """

    def __init__(
        self,
        provider: BaseProvider,
        project: Project,
        store: ProjectStore,
        apply,
        max_parallel_calls: int = 4,
    ) -> None:
        self.provider = provider
        self.project = project
        self.store = store
        self.apply = apply  # Callable[[Mutation], EventRecord]: the serialized mutation path
        self.ctx = RequestContext(project=project, store=store)
        self._sem = threading.BoundedSemaphore(max_parallel_calls)
        self._register_lock = threading.Lock()

    # -- structured

    def complete_structured(self, req: StructuredRequest) -> StructuredResult:
        with self._sem:
            return complete_structured(self.provider, req, self.ctx)

    # -- media

    def generate_image(self, req: ImageGenRequest) -> ProviderResult:
        self._check_n(req.n)
        if req.base_image is not None:
            self.ctx.ref(req.base_image)
        return self._run_media(
            lambda: self.provider.generate_images(req, self.ctx), ".png", config_mod.TIMEOUT_IMAGE_S, req.n
        )

    def generate_video(self, req: VideoGenRequest) -> ProviderResult:
        self._check_n(req.n)
        self.ctx.ref(req.keyframe)  # keyframe must exist and be clean
        return self._run_media(
            lambda: self.provider.generate_videos(req, self.ctx), ".mp4", config_mod.TIMEOUT_VIDEO_S, req.n
        )

    def synthesize_speech(self, req: SpeechRequest) -> ProviderResult:
        self._check_n(req.n)
        if not req.script.strip():
            raise EmptyScript("cannot synthesize narration from an empty script")
        return self._run_media(
            lambda: self.provider.synthesize_speech(req, self.ctx), ".wav", config_mod.TIMEOUT_AUDIO_S, req.n
        )

    def synthesize_music(self, req: MusicRequest) -> ProviderResult:
        self._check_n(req.n)
        return self._run_media(
            lambda: self.provider.synthesize_music(req, self.ctx), ".wav", config_mod.TIMEOUT_AUDIO_S, req.n
        )

    # -- internals

    @staticmethod
    def _check_n(n: int) -> None:
        if n < 1:
            raise InvariantViolation("n-positive", f"requested {n} outputs; need at least 1")

    def _run_media(self, call, suffix: str, budget_s: float, n: int) -> ProviderResult:
        start = time.monotonic()
        partial: RawPartialFailure | None = None
        with self._sem:
            try:
                blobs = call()
            except RawPartialFailure as exc:
                partial = exc
                blobs = exc.outputs
        elapsed = time.monotonic() - start
        if elapsed > budget_s:
            raise ProviderTimeout(
                f"provider call exceeded its {budget_s:.0f}s budget ({elapsed:.1f}s)", budget_s=budget_s
            )
        ids = [self._register(blob, suffix) for blob in blobs]
        if partial is not None:
            raise PartialFailure(
                f"{len(partial.errors)} of {n} outputs failed", outputs=ids, errors=partial.errors
            )
        result = ProviderResult(
            outputs=ids,
            latency_ms=elapsed * 1000.0,
            provider_name=self.provider.name,
        )
        if len(result.outputs) != n:
            raise PartialFailure(
                f"provider returned {len(result.outputs)} of {n} outputs",
                outputs=result.outputs,
                errors=["short output"],
            )
        return result

    def _register(self, blob: bytes, suffix: str) -> str:
        with self._register_lock:
            ref = self.store.register_bytes(self.project, self.apply, blob, suffix)
        return ref.asset_id
