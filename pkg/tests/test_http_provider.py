"""HTTP provider wire behavior, exercised against a patched transport."""

import base64
import json

import httpx
import pytest

from storyweave.errors import ConfigError, ContentRefused, ProviderTimeout, ProviderUnavailable
from storyweave.providers.base import (
    ImageGenRequest,
    Part,
    RequestContext,
    StructuredRequest,
)
from storyweave.providers.http import HttpProvider

from .conftest import fixture_png


def patched_post(monkeypatch, handler):
    calls = []

    def fake_post(url, json=None, headers=None, timeout=None):
        calls.append({"url": url, "json": json, "headers": headers, "timeout": timeout})
        return handler(url, json)

    monkeypatch.setattr(httpx, "post", fake_post)
    return calls


def ok_response(payload):
    return httpx.Response(200, json=payload, request=httpx.Request("POST", "http://x"))


def test_structured_round_trip(monkeypatch, workspace):
    provider = HttpProvider(endpoints={"structured": "http://llm/complete"})
    calls = patched_post(monkeypatch, lambda url, body: ok_response({"text": json.dumps({"title": "t"})}))
    req = StructuredRequest(
        system_prompt="sys",
        user_parts=[Part.of_text("hello")],
        schema={"type": "object", "properties": {"title": {"type": "string"}}},
    )
    ctx = RequestContext(project=workspace.project, store=workspace.store)
    raw = provider.complete(req, ctx)
    assert json.loads(raw) == {"title": "t"}
    sent = calls[0]["json"]
    assert sent["system"] == "sys"
    assert sent["parts"] == [{"text": "hello"}]


def test_image_parts_are_downscaled_and_base64(monkeypatch, workspace):
    ref = workspace.store.register_bytes(
        workspace.project, workspace.apply, fixture_png("http"), ".png"
    )
    provider = HttpProvider(endpoints={"structured": "http://llm/complete"})
    calls = patched_post(monkeypatch, lambda url, body: ok_response({"text": "{}"}))
    req = StructuredRequest(
        system_prompt="s",
        user_parts=[Part.of_image(ref.asset_id, max_edge=64)],
        schema={"type": "object", "properties": {}},
    )
    provider.complete(req, RequestContext(project=workspace.project, store=workspace.store))
    part = calls[0]["json"]["parts"][0]
    data = base64.b64decode(part["image_b64"])
    from PIL import Image
    import io

    with Image.open(io.BytesIO(data)) as img:
        assert max(img.size) <= 64


def test_missing_endpoint_is_config_error(workspace):
    provider = HttpProvider(endpoints={})
    with pytest.raises(ConfigError):
        provider.generate_images(
            ImageGenRequest(prompt="p", n=1), RequestContext(project=workspace.project)
        )


def test_422_maps_to_content_refused(monkeypatch, workspace):
    provider = HttpProvider(endpoints={"image": "http://img/gen"})
    patched_post(
        monkeypatch,
        lambda url, body: httpx.Response(422, text="no", request=httpx.Request("POST", url)),
    )
    with pytest.raises(ContentRefused):
        provider.generate_images(ImageGenRequest(prompt="p", n=1), RequestContext(project=workspace.project))


def test_timeout_maps_to_provider_timeout(monkeypatch, workspace):
    provider = HttpProvider(endpoints={"image": "http://img/gen"})

    def raise_timeout(url, json=None, headers=None, timeout=None):
        raise httpx.ConnectTimeout("slow")

    monkeypatch.setattr(httpx, "post", raise_timeout)
    with pytest.raises(ProviderTimeout):
        provider.generate_images(ImageGenRequest(prompt="p", n=1), RequestContext(project=workspace.project))


def test_5xx_maps_to_provider_unavailable(monkeypatch, workspace):
    provider = HttpProvider(endpoints={"image": "http://img/gen"})
    patched_post(
        monkeypatch,
        lambda url, body: httpx.Response(503, text="down", request=httpx.Request("POST", url)),
    )
    with pytest.raises(ProviderUnavailable):
        provider.generate_images(ImageGenRequest(prompt="p", n=1), RequestContext(project=workspace.project))


def test_credentials_pulled_from_named_env_var(monkeypatch, workspace):
    provider = HttpProvider(
        endpoints={"image": "http://img/gen"}, credentials_env={"image": "IMG_TOKEN"}
    )
    with pytest.raises(ConfigError):
        provider.generate_images(ImageGenRequest(prompt="p", n=1), RequestContext(project=workspace.project))
    monkeypatch.setenv("IMG_TOKEN", "secret")
    calls = patched_post(
        monkeypatch,
        lambda url, body: ok_response({"outputs": [base64.b64encode(b"png").decode()]}),
    )
    provider.generate_images(ImageGenRequest(prompt="p", n=1), RequestContext(project=workspace.project))
    assert calls[0]["headers"]["Authorization"] == "Bearer secret"
