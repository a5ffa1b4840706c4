"""Live provider speaking JSON-over-HTTP to configured endpoints.

One endpoint per modality (``structured``, ``image``, ``video``, ``speech``,
``music``); credentials are read from environment variables named in the
config, never stored in project files.  Request/response bodies are logged
at debug level with media payloads elided.

Wire format (all POST, JSON body):
    structured: {system, parts, schema, creativity} -> {text}
    image/video/speech/music: request fields        -> {outputs: [base64]}
"""

from __future__ import annotations

import base64
import logging
import os

import httpx

from .. import config as config_mod
from ..errors import ConfigError, ContentRefused, ProviderTimeout, ProviderUnavailable
from .base import (
    BaseProvider,
    ImageGenRequest,
    MusicRequest,
    RequestContext,
    SpeechRequest,
    StructuredRequest,
    VideoGenRequest,
)

logger = logging.getLogger(__name__)


class HttpProvider(BaseProvider):
    name = "http"

    def __init__(self, endpoints: dict[str, str], credentials_env: dict[str, str] | None = None) -> None:
        self.endpoints = endpoints
        self.credentials_env = credentials_env or {}

    def _headers(self, modality: str) -> dict[str, str]:
        env_name = self.credentials_env.get(modality)
        if not env_name:
            return {}
        token = os.environ.get(env_name)
        if not token:
            raise ConfigError(f"credential env var {env_name} for {modality} is unset")
        return {"Authorization": f"Bearer {token}"}

    def _post(self, modality: str, body: dict, timeout_s: float) -> dict:
        endpoint = self.endpoints.get(modality)
        if not endpoint:
            raise ConfigError(f"no endpoint configured for modality {modality!r}")
        logger.debug("POST %s keys=%s", endpoint, sorted(body.keys()))
        try:
            response = httpx.post(endpoint, json=body, headers=self._headers(modality), timeout=timeout_s)
        except httpx.TimeoutException as exc:
            raise ProviderTimeout(f"{modality} endpoint timed out after {timeout_s:.0f}s") from exc
        except httpx.HTTPError as exc:
            raise ProviderUnavailable(f"{modality} endpoint unreachable: {exc}") from exc
        if response.status_code == 422:
            raise ContentRefused(f"{modality} endpoint refused the request: {response.text[:200]}")
        if response.status_code >= 400:
            raise ProviderUnavailable(f"{modality} endpoint returned {response.status_code}")
        return response.json()

    @staticmethod
    def _encode_parts(req: StructuredRequest, ctx: RequestContext) -> list[dict]:
        from .. import media

        parts = []
        for part in req.user_parts:
            if part.text is not None:
                parts.append({"text": part.text})
            else:
                data = ctx.read(part.image)
                if part.max_edge:
                    data = media.downscale_image(data, part.max_edge)
                parts.append({"image_b64": base64.b64encode(data).decode("ascii")})
        return parts

    def complete(self, req: StructuredRequest, ctx: RequestContext) -> str:
        body = {
            "system": req.system_prompt,
            "parts": self._encode_parts(req, ctx),
            "schema": req.schema,
            "creativity": req.creativity,
        }
        result = self._post("structured", body, config_mod.TIMEOUT_STRUCTURED_S)
        return result["text"]

    @staticmethod
    def _decode_outputs(result: dict) -> list[bytes]:
        return [base64.b64decode(item) for item in result.get("outputs", [])]

    def generate_images(self, req: ImageGenRequest, ctx: RequestContext) -> list[bytes]:
        body = {"prompt": req.prompt, "n": req.n, "seed": req.seed}
        if req.base_image:
            body["base_image_b64"] = base64.b64encode(ctx.read(req.base_image)).decode("ascii")
        return self._decode_outputs(self._post("image", body, config_mod.TIMEOUT_IMAGE_S))

    def generate_videos(self, req: VideoGenRequest, ctx: RequestContext) -> list[bytes]:
        body = {
            "prompt": req.prompt,
            "n": req.n,
            "seed": req.seed,
            "duration_hint_s": req.duration_hint_s,
            "keyframe_b64": base64.b64encode(ctx.read(req.keyframe)).decode("ascii"),
        }
        return self._decode_outputs(self._post("video", body, config_mod.TIMEOUT_VIDEO_S))

    def synthesize_speech(self, req: SpeechRequest, ctx: RequestContext) -> list[bytes]:
        body = {"script": req.script, "voice": req.voice, "n": req.n, "seed": req.seed}
        return self._decode_outputs(self._post("speech", body, config_mod.TIMEOUT_AUDIO_S))

    def synthesize_music(self, req: MusicRequest, ctx: RequestContext) -> list[bytes]:
        body = {"prompt": req.prompt, "duration_s": req.duration_s, "n": req.n, "seed": req.seed}
        return self._decode_outputs(self._post("music", body, config_mod.TIMEOUT_AUDIO_S))
