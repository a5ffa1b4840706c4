"""Uniform abstraction over the generative model backends.

``ProviderHub`` is the only surface the pipelines talk to: it validates
requests, bounds concurrency with a global semaphore, runs the structured-
output repair loop, and registers generated media into the project.  The
deterministic :class:`~storyweave.providers.mock.MockProvider` backs all
offline tests; the HTTP provider speaks to configured live endpoints.
"""

from .base import (
    ImageGenRequest,
    MusicRequest,
    Part,
    ProviderHub,
    ProviderResult,
    RequestContext,
    SpeechRequest,
    StructuredRequest,
    StructuredResult,
    VideoGenRequest,
    complete_structured,
)
from .mock import MockProvider

__all__ = [
    "ImageGenRequest",
    "MockProvider",
    "MusicRequest",
    "Part",
    "ProviderHub",
    "ProviderResult",
    "RequestContext",
    "SpeechRequest",
    "StructuredRequest",
    "StructuredResult",
    "VideoGenRequest",
    "complete_structured",
]


def make_provider(config):
    """Instantiate the configured raw provider."""
    if config.provider == "mock":
        return MockProvider(seed=config.seed, latency_s=config.mock_latency_s)
    from .http import HttpProvider

    return HttpProvider(endpoints=config.endpoints, credentials_env=config.credentials_env)
