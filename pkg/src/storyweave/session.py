"""Session: one open project with its store, log, config, and provider hub.

Mutations to a project are serialized through :meth:`Session.apply` (single
writer); reads are safe concurrently.  Listeners registered on the session
observe every committed mutation, which is how the HTTP service feeds its
event stream.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Callable, Optional

from .config import Config, load_config, save_config
from .errors import InvariantViolation
from .model import Project, new_project
from .mutations import EventRecord, Mutation, MutationLog
from .providers import ProviderHub, make_provider
from .providers.base import BaseProvider
from .store import ProjectStore


class Session:
    def __init__(
        self,
        project: Project,
        store: ProjectStore,
        log: MutationLog,
        config: Config,
        provider: Optional[BaseProvider] = None,
    ) -> None:
        self.project = project
        self.store = store
        self.log = log
        self.config = config
        self.provider = provider if provider is not None else make_provider(config)
        self._mutex = threading.RLock()
        self._listeners: list[Callable[[dict], None]] = []
        self.hub = ProviderHub(
            self.provider,
            project,
            store,
            apply=self.apply,
            max_parallel_calls=config.max_parallel_calls,
        )

    # -- lifecycle

    @classmethod
    def create(cls, root: str | Path, project_id: str = "project", **config_overrides) -> "Session":
        store = ProjectStore(root)
        if store.project_path.exists():
            raise InvariantViolation("project-exists", f"project already initialized at {store.project_path}")
        project = new_project(project_id)
        config = load_config(root, **config_overrides)
        store.init(project)
        save_config(config, store.root)
        return cls(project, store, MutationLog(), config)

    @classmethod
    def open(cls, root: str | Path, provider: Optional[BaseProvider] = None, **config_overrides) -> "Session":
        store = ProjectStore(root)
        project, log = store.load()
        config = load_config(root, **config_overrides)
        return cls(project, store, log, config, provider=provider)

    # -- mutation path (single writer)

    @property
    def revision(self) -> int:
        return self.log.revision

    def apply(self, mutation: Mutation) -> EventRecord:
        with self._mutex:
            record = self.log.apply(self.project, mutation)
        self._notify(
            {"type": "mutation", "revision": record.seq, "kind": mutation.kind, "op": record.op}
        )
        return record

    def undo(self) -> EventRecord:
        with self._mutex:
            record = self.log.undo(self.project)
        self._notify({"type": "mutation", "revision": record.seq, "kind": "undo", "op": record.op})
        return record

    def redo(self) -> EventRecord:
        with self._mutex:
            record = self.log.redo(self.project)
        self._notify({"type": "mutation", "revision": record.seq, "kind": "redo", "op": record.op})
        return record

    def save(self) -> Path:
        with self._mutex:
            return self.store.save(self.project, self.log)

    # -- listeners

    def subscribe(self, listener: Callable[[dict], None]) -> None:
        self._listeners.append(listener)

    def _notify(self, event: dict) -> None:
        for listener in list(self._listeners):
            listener(event)
