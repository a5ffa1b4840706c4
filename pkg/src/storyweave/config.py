"""Runtime configuration: provider selection, seeds, budgets, render command.

Resolution order: built-in defaults < project config.json < environment
variables (``STORYWEAVE_*``) < explicit overrides (CLI flags).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

CONFIG_FILE = "config.json"

# creativity knob defaults: exploratory ops sample wider than extraction ops
CREATIVITY_IDEATION = 0.7
CREATIVITY_EXTRACTION = 0.2

# provider call budgets, seconds
TIMEOUT_STRUCTURED_S = 30.0
TIMEOUT_IMAGE_S = 30.0
TIMEOUT_VIDEO_S = 120.0
TIMEOUT_AUDIO_S = 60.0


@dataclass
class Config:
    provider: str = "mock"  # mock | http
    seed: int = 0
    max_parallel_calls: int = 4
    mock_latency_s: float = 0.0
    render_command: str | None = None  # template with {edl} and {out}
    principles_path: str | None = None
    endpoints: dict[str, str] = field(default_factory=dict)  # modality -> URL
    credentials_env: dict[str, str] = field(default_factory=dict)  # modality -> env var name

    def to_dict(self) -> dict:
        return {
            "provider": self.provider,
            "seed": self.seed,
            "max_parallel_calls": self.max_parallel_calls,
            "mock_latency_s": self.mock_latency_s,
            "render_command": self.render_command,
            "principles_path": self.principles_path,
            "endpoints": self.endpoints,
            "credentials_env": self.credentials_env,
        }


def load_config(project_root: str | Path | None = None, **overrides) -> Config:
    cfg = Config()
    if project_root is not None:
        path = Path(project_root) / CONFIG_FILE
        if path.exists():
            try:
                data = json.loads(path.read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config.json is not valid JSON: {exc}") from exc
            _apply(cfg, data)
    env: dict = {}
    if "STORYWEAVE_PROVIDER" in os.environ:
        env["provider"] = os.environ["STORYWEAVE_PROVIDER"]
    if "STORYWEAVE_SEED" in os.environ:
        env["seed"] = int(os.environ["STORYWEAVE_SEED"])
    if "STORYWEAVE_RENDER_COMMAND" in os.environ:
        env["render_command"] = os.environ["STORYWEAVE_RENDER_COMMAND"]
    if "STORYWEAVE_MAX_PARALLEL" in os.environ:
        env["max_parallel_calls"] = int(os.environ["STORYWEAVE_MAX_PARALLEL"])
    _apply(cfg, env)
    _apply(cfg, {k: v for k, v in overrides.items() if v is not None})
    if cfg.provider not in ("mock", "http"):
        raise ConfigError(f"unknown provider {cfg.provider!r} (expected mock or http)")
    if cfg.max_parallel_calls < 1:
        raise ConfigError("max_parallel_calls must be >= 1")
    return cfg


def save_config(cfg: Config, project_root: str | Path) -> Path:
    path = Path(project_root) / CONFIG_FILE
    path.write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _apply(cfg: Config, data: dict) -> None:
    for key, value in data.items():
        if hasattr(cfg, key):
            setattr(cfg, key, value)
