"""Fault-injecting provider wrappers for exercising repair/retry paths."""

from __future__ import annotations

from .base import BaseProvider, RequestContext, StructuredRequest


class FlakyStructuredProvider(BaseProvider):
    """Returns scripted bad payloads for the first N structured calls, then
    delegates to the wrapped provider."""

    name = "flaky"

    def __init__(self, inner: BaseProvider, bad_payloads: list[str]):
        self.inner = inner
        self.bad_payloads = list(bad_payloads)
        self.calls = 0

    def complete(self, req: StructuredRequest, ctx: RequestContext) -> str:
        self.calls += 1
        if self.bad_payloads:
            return self.bad_payloads.pop(0)
        return self.inner.complete(req, ctx)

    def generate_images(self, req, ctx):
        return self.inner.generate_images(req, ctx)

    def generate_videos(self, req, ctx):
        return self.inner.generate_videos(req, ctx)

    def synthesize_speech(self, req, ctx):
        return self.inner.synthesize_speech(req, ctx)

    def synthesize_music(self, req, ctx):
        return self.inner.synthesize_music(req, ctx)


class ScriptedStructuredProvider(BaseProvider):
    """Plays back a fixed sequence of structured responses (repair-loop
    oracles build these by hand), then falls through to the inner provider."""

    name = "scripted"

    def __init__(self, inner: BaseProvider, responses: list[str]):
        self.inner = inner
        self.responses = list(responses)

    def complete(self, req: StructuredRequest, ctx: RequestContext) -> str:
        if self.responses:
            return self.responses.pop(0)
        return self.inner.complete(req, ctx)

    def generate_images(self, req, ctx):
        return self.inner.generate_images(req, ctx)

    def generate_videos(self, req, ctx):
        return self.inner.generate_videos(req, ctx)

    def synthesize_speech(self, req, ctx):
        return self.inner.synthesize_speech(req, ctx)

    def synthesize_music(self, req, ctx):
        return self.inner.synthesize_music(req, ctx)
