"""Prompt assembly: versioned templates plus the narrative-principles doc.

Templates are plain text files with named ``{placeholder}`` fields and a
``version:`` header line.  The narrative-principles document is injected
into the system prompt of every structured call and can be swapped via
``config.principles_path``.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..config import Config
from ..errors import ConfigError

SYSTEM_ROLE = (
    "You are the story-development engine inside a video authoring tool. "
    "You reason over the creator's captured and generated media, their notes, "
    "and their scripts. All outputs must be suggestions the creator can "
    "accept, reject, or adapt: never invent media ids, and always answer "
    "with JSON matching the requested schema."
)


@dataclass
class Template:
    name: str
    version: str
    body: str

    def render(self, **values: object) -> str:
        fields = {f for _, f, _, _ in string.Formatter().parse(self.body) if f}
        missing = fields - set(values)
        if missing:
            raise ConfigError(f"template {self.name} missing placeholders: {sorted(missing)}")
        return self.body.format(**values)


@dataclass
class NarrativePrinciples:
    text: str
    version: str


def _split_version_header(raw: str, origin: str) -> tuple[str, str]:
    lines = raw.splitlines()
    if not lines or not lines[0].startswith("version:"):
        raise ConfigError(f"{origin}: first line must be a 'version:' tag")
    version = lines[0].split(":", 1)[1].strip()
    body = "\n".join(lines[1:]).strip("\n")
    if not body.strip():
        raise ConfigError(f"{origin}: empty body")
    return version, body


_template_cache: dict[str, Template] = {}


def load_template(name: str) -> Template:
    if name not in _template_cache:
        raw = resources.files("storyweave.prompts").joinpath(f"templates/{name}.txt").read_text("utf-8")
        version, body = _split_version_header(raw, f"template {name}")
        _template_cache[name] = Template(name=name, version=version, body=body)
    return _template_cache[name]


def render(name: str, **values: object) -> str:
    return load_template(name).render(**values)


def load_principles(config: Config | None = None) -> NarrativePrinciples:
    if config is not None and config.principles_path:
        raw = Path(config.principles_path).read_text("utf-8")
        origin = config.principles_path
    else:
        raw = resources.files("storyweave.prompts").joinpath("narrative_principles.txt").read_text("utf-8")
        origin = "narrative_principles.txt"
    version, body = _split_version_header(raw, origin)
    return NarrativePrinciples(text=body, version=version)


def system_prompt(config: Config | None = None) -> str:
    principles = load_principles(config)
    return f"{SYSTEM_ROLE}\n\nNarrative and cinematic principles (v{principles.version}):\n{principles.text}"


def block(name: str, text: str) -> str:
    """Sentinel-delimited payload block; the mock provider parses these the
    way a live model would read the prompt."""
    return f"<<{name}\n{text}\n{name}>>"
