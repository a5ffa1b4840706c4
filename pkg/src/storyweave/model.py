"""The versioned story graph: project -> story versions -> scenes -> shots.

Every other module reads and mutates story state exclusively through this
module and :mod:`storyweave.mutations`.  Serialization here is canonical:
two structurally identical projects always produce byte-identical JSON,
which the persistence round-trip and reproducibility guarantees build on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

from .errors import IntegrityError, InvariantViolation, UnknownId

SCHEMA_VERSION = 1

# Fixed 12-entry scene palette, assigned round-robin by the grouping pipeline.
PALETTE = [
    "#5B8DEF",
    "#E8743B",
    "#6BBF59",
    "#C94C7C",
    "#8E6BBF",
    "#D9A441",
    "#4FB8B2",
    "#BF6B4F",
    "#7A9E4F",
    "#5F6FBF",
    "#BF4F9E",
    "#4F9EBF",
]

SUGGESTION_CATEGORIES = [
    "structure",
    "plot",
    "imagery",
    "character",
    "dialogue",
    "pacing",
    "emotion",
    "setting",
    "theme",
    "other",
]


@dataclass
class AssetRef:
    asset_id: str
    kind: str  # image | video | audio
    uri: str  # project-relative, inside the asset directory
    checksum: str
    duration_s: Optional[float] = None  # video/audio only
    width: Optional[int] = None
    height: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "asset_id": self.asset_id,
            "kind": self.kind,
            "uri": self.uri,
            "checksum": self.checksum,
            "duration_s": self.duration_s,
            "width": self.width,
            "height": self.height,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AssetRef":
        return cls(
            asset_id=data["asset_id"],
            kind=data["kind"],
            uri=data["uri"],
            checksum=data["checksum"],
            duration_s=data.get("duration_s"),
            width=data.get("width"),
            height=data.get("height"),
        )


@dataclass
class GenerationProvenance:
    job_id: str
    source_prompt: str
    explanation: str = ""
    base_keyframe: Optional[str] = None  # asset_id
    neighbor_shots: Optional[tuple[Optional[str], Optional[str]]] = None

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "source_prompt": self.source_prompt,
            "explanation": self.explanation,
            "base_keyframe": self.base_keyframe,
            "neighbor_shots": list(self.neighbor_shots) if self.neighbor_shots else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GenerationProvenance":
        neighbors = data.get("neighbor_shots")
        return cls(
            job_id=data["job_id"],
            source_prompt=data["source_prompt"],
            explanation=data.get("explanation", ""),
            base_keyframe=data.get("base_keyframe"),
            neighbor_shots=tuple(neighbors) if neighbors else None,
        )


@dataclass
class Shot:
    shot_id: str
    asset_id: str
    provenance: str  # captured | generated; immutable after creation
    description: str = ""
    canvas_pos: tuple[float, float] = (0.0, 0.0)
    generation: Optional[GenerationProvenance] = None
    trim: Optional[tuple[float, float]] = None  # (in_s, out_s)

    def to_dict(self) -> dict:
        return {
            "shot_id": self.shot_id,
            "asset_id": self.asset_id,
            "provenance": self.provenance,
            "description": self.description,
            "canvas_pos": list(self.canvas_pos),
            "generation": self.generation.to_dict() if self.generation else None,
            "trim": list(self.trim) if self.trim else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Shot":
        gen = data.get("generation")
        trim = data.get("trim")
        return cls(
            shot_id=data["shot_id"],
            asset_id=data["asset_id"],
            provenance=data["provenance"],
            description=data.get("description", ""),
            canvas_pos=tuple(data.get("canvas_pos", (0.0, 0.0))),
            generation=GenerationProvenance.from_dict(gen) if gen else None,
            trim=tuple(trim) if trim else None,
        )


@dataclass
class Correspondence:
    shot_id: str
    span: tuple[int, int]  # (char_start, char_end) into the scene script

    def to_dict(self) -> dict:
        return {"shot_id": self.shot_id, "span": list(self.span)}

    @classmethod
    def from_dict(cls, data: dict) -> "Correspondence":
        return cls(shot_id=data["shot_id"], span=tuple(data["span"]))


@dataclass
class Scene:
    scene_id: str
    title: str
    color: str
    description: str = ""
    shots: list[str] = field(default_factory=list)
    script: str = ""
    script_spans: list[dict] = field(default_factory=list)  # suggestion highlight markup
    narration: Optional[str] = None  # asset_id (audio)
    music: Optional[str] = None  # asset_id (audio)
    correspondences: list[Correspondence] = field(default_factory=list)
    keyframe_shot: Optional[str] = None
    generated: bool = False  # scene originated from an accepted proposal

    def to_dict(self) -> dict:
        return {
            "scene_id": self.scene_id,
            "title": self.title,
            "color": self.color,
            "description": self.description,
            "shots": list(self.shots),
            "script": self.script,
            "script_spans": list(self.script_spans),
            "narration": self.narration,
            "music": self.music,
            "correspondences": [c.to_dict() for c in self.correspondences],
            "keyframe_shot": self.keyframe_shot,
            "generated": self.generated,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Scene":
        return cls(
            scene_id=data["scene_id"],
            title=data["title"],
            color=data["color"],
            description=data.get("description", ""),
            shots=list(data.get("shots", [])),
            script=data.get("script", ""),
            script_spans=list(data.get("script_spans", [])),
            narration=data.get("narration"),
            music=data.get("music"),
            correspondences=[Correspondence.from_dict(c) for c in data.get("correspondences", [])],
            keyframe_shot=data.get("keyframe_shot"),
            generated=data.get("generated", False),
        )


@dataclass
class StoryVersion:
    version_id: str
    name: str
    scenes: list[str] = field(default_factory=list)
    origin: str = "original"  # original | duplicate | prompted_variation
    variation_prompt: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "version_id": self.version_id,
            "name": self.name,
            "scenes": list(self.scenes),
            "origin": self.origin,
            "variation_prompt": self.variation_prompt,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StoryVersion":
        return cls(
            version_id=data["version_id"],
            name=data["name"],
            scenes=list(data.get("scenes", [])),
            origin=data.get("origin", "original"),
            variation_prompt=data.get("variation_prompt"),
        )


@dataclass
class Suggestion:
    suggestion_id: str
    level: str  # story | scene
    category: str
    text: str
    explanation: str = ""
    tips: list[str] = field(default_factory=list)
    relevant_shot_ids: list[str] = field(default_factory=list)
    scene_id: Optional[str] = None
    status: str = "active"  # active | disliked | addressed

    def to_dict(self) -> dict:
        return {
            "suggestion_id": self.suggestion_id,
            "level": self.level,
            "category": self.category,
            "text": self.text,
            "explanation": self.explanation,
            "tips": list(self.tips),
            "relevant_shot_ids": list(self.relevant_shot_ids),
            "scene_id": self.scene_id,
            "status": self.status,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Suggestion":
        return cls(
            suggestion_id=data["suggestion_id"],
            level=data["level"],
            category=data["category"],
            text=data["text"],
            explanation=data.get("explanation", ""),
            tips=list(data.get("tips", [])),
            relevant_shot_ids=list(data.get("relevant_shot_ids", [])),
            scene_id=data.get("scene_id"),
            status=data.get("status", "active"),
        )


@dataclass
class Project:
    project_id: str
    story_context: str = ""
    versions: list[StoryVersion] = field(default_factory=list)
    active_version: str = ""
    scenes: dict[str, Scene] = field(default_factory=dict)
    shots: dict[str, Shot] = field(default_factory=dict)
    assets: dict[str, AssetRef] = field(default_factory=dict)
    suggestions: list[Suggestion] = field(default_factory=list)
    disliked_suggestions: list[str] = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION
    id_seq: int = 0

    # -- id allocation (sequential, so fixed-seed runs are byte-reproducible)

    def new_id(self, prefix: str) -> str:
        self.id_seq += 1
        return f"{prefix}-{self.id_seq:04d}"

    # -- lookups

    def version(self, version_id: str) -> StoryVersion:
        for version in self.versions:
            if version.version_id == version_id:
                return version
        raise UnknownId(f"unknown version: {version_id}")

    def scene(self, scene_id: str) -> Scene:
        try:
            return self.scenes[scene_id]
        except KeyError:
            raise UnknownId(f"unknown scene: {scene_id}") from None

    def shot(self, shot_id: str) -> Shot:
        try:
            return self.shots[shot_id]
        except KeyError:
            raise UnknownId(f"unknown shot: {shot_id}") from None

    def asset(self, asset_id: str) -> AssetRef:
        try:
            return self.assets[asset_id]
        except KeyError:
            raise UnknownId(f"unknown asset: {asset_id}") from None

    def active(self) -> StoryVersion:
        return self.version(self.active_version)

    def scene_of_shot(self, shot_id: str, version_id: Optional[str] = None) -> Optional[Scene]:
        version = self.version(version_id or self.active_version)
        for scene_id in version.scenes:
            if shot_id in self.scenes[scene_id].shots:
                return self.scenes[scene_id]
        return None

    def ungrouped_shots(self, version_id: Optional[str] = None) -> list[str]:
        """Shots not assigned to any scene of the given version (the loose pool)."""
        version = self.version(version_id or self.active_version)
        grouped: set[str] = set()
        for scene_id in version.scenes:
            grouped.update(self.scenes[scene_id].shots)
        return [shot_id for shot_id in self.shots if shot_id not in grouped]

    def asset_by_checksum(self, checksum: str) -> Optional[AssetRef]:
        for ref in self.assets.values():
            if ref.checksum == checksum:
                return ref
        return None

    def next_palette_color(self) -> str:
        return PALETTE[len(self.scenes) % len(PALETTE)]

    # -- serialization

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "project_id": self.project_id,
            "story_context": self.story_context,
            "active_version": self.active_version,
            "id_seq": self.id_seq,
            "versions": [v.to_dict() for v in self.versions],
            "scenes": {k: s.to_dict() for k, s in sorted(self.scenes.items())},
            "shots": {k: s.to_dict() for k, s in sorted(self.shots.items())},
            "assets": {k: a.to_dict() for k, a in sorted(self.assets.items())},
            "suggestions": [s.to_dict() for s in self.suggestions],
            "disliked_suggestions": list(self.disliked_suggestions),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Project":
        return cls(
            project_id=data["project_id"],
            story_context=data.get("story_context", ""),
            versions=[StoryVersion.from_dict(v) for v in data.get("versions", [])],
            active_version=data.get("active_version", ""),
            scenes={k: Scene.from_dict(v) for k, v in data.get("scenes", {}).items()},
            shots={k: Shot.from_dict(v) for k, v in data.get("shots", {}).items()},
            assets={k: AssetRef.from_dict(v) for k, v in data.get("assets", {}).items()},
            suggestions=[Suggestion.from_dict(s) for s in data.get("suggestions", [])],
            disliked_suggestions=list(data.get("disliked_suggestions", [])),
            schema_version=data.get("schema_version", SCHEMA_VERSION),
            id_seq=data.get("id_seq", 0),
        )


def canonical_json(doc: Any) -> str:
    """Stable serialization used for persistence, golden tests, and EDLs."""
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def project_state_json(project: Project) -> str:
    return canonical_json(project.to_dict())


def new_project(project_id: str = "project") -> Project:
    project = Project(project_id=project_id)
    version = StoryVersion(version_id="version-0000", name="Original", origin="original")
    project.versions.append(version)
    project.active_version = version.version_id
    return project


# ---------------------------------------------------------------------------
# Validation


def validate_project(project: Project) -> None:
    """Re-validate every structural invariant; raises naming the failure site.

    Raised errors carry the precise path to the offending field so corrupt
    documents are rejected with an actionable message.
    """
    seen_versions: set[str] = set()
    active_found = False
    for vi, version in enumerate(project.versions):
        path = f"versions[{vi}]"
        if version.version_id in seen_versions:
            raise IntegrityError(f"{path}: duplicate version_id {version.version_id}", id=version.version_id)
        seen_versions.add(version.version_id)
        if version.version_id == project.active_version:
            active_found = True
        if version.origin not in ("original", "duplicate", "prompted_variation"):
            raise IntegrityError(f"{path}.origin: invalid value {version.origin!r}", id=version.version_id)

        seen_scenes: set[str] = set()
        shot_owner: dict[str, str] = {}
        for scene_id in version.scenes:
            if scene_id in seen_scenes:
                raise InvariantViolation(
                    "scene-position-uniqueness",
                    f"{path}.scenes: scene {scene_id} appears more than once",
                    id=scene_id,
                )
            seen_scenes.add(scene_id)
            if scene_id not in project.scenes:
                raise IntegrityError(f"{path}.scenes: unresolved scene id {scene_id}", id=scene_id)
            for shot_id in project.scenes[scene_id].shots:
                if shot_id in shot_owner:
                    raise InvariantViolation(
                        "shot-membership-uniqueness",
                        f"{path}: shot {shot_id} belongs to both {shot_owner[shot_id]} and {scene_id}",
                        id=shot_id,
                    )
                shot_owner[shot_id] = scene_id

    if project.versions and not active_found:
        raise IntegrityError(f"active_version: unresolved version id {project.active_version}", id=project.active_version)

    for scene_id, scene in project.scenes.items():
        path = f"scenes[{scene_id}]"
        if scene.scene_id != scene_id:
            raise IntegrityError(f"{path}.scene_id: key mismatch ({scene.scene_id})", id=scene_id)
        seen_shots: set[str] = set()
        for shot_id in scene.shots:
            if shot_id in seen_shots:
                raise InvariantViolation(
                    "scene-shot-uniqueness", f"{path}.shots: duplicate shot {shot_id}", id=shot_id
                )
            seen_shots.add(shot_id)
            if shot_id not in project.shots:
                raise IntegrityError(f"{path}.shots: unresolved shot id {shot_id}", id=shot_id)
        if scene.shots:
            if scene.keyframe_shot not in scene.shots:
                raise InvariantViolation(
                    "keyframe-in-scene",
                    f"{path}.keyframe_shot: {scene.keyframe_shot} not among the scene's shots",
                    id=scene_id,
                )
        for ci, corr in enumerate(scene.correspondences):
            if corr.shot_id not in scene.shots:
                raise IntegrityError(
                    f"{path}.correspondences[{ci}]: shot {corr.shot_id} not in scene", id=corr.shot_id
                )
        _validate_correspondence_spans(scene, path)
        for ref in (scene.narration, scene.music):
            if ref is not None and ref not in project.assets:
                raise IntegrityError(f"{path}: unresolved audio asset {ref}", id=ref)

    for shot_id, shot in project.shots.items():
        path = f"shots[{shot_id}]"
        if shot.shot_id != shot_id:
            raise IntegrityError(f"{path}.shot_id: key mismatch ({shot.shot_id})", id=shot_id)
        if shot.provenance not in ("captured", "generated"):
            raise IntegrityError(f"{path}.provenance: invalid value {shot.provenance!r}", id=shot_id)
        if shot.asset_id not in project.assets:
            raise IntegrityError(f"{path}.asset_id: unresolved asset {shot.asset_id}", id=shot.asset_id)
        if shot.provenance == "generated" and shot.generation is None:
            raise InvariantViolation(
                "generated-shot-provenance", f"{path}: generated shot without generation record", id=shot_id
            )
        asset = project.assets[shot.asset_id]
        if shot.trim is not None:
            in_s, out_s = shot.trim
            limit = asset.duration_s if asset.duration_s is not None else float("inf")
            if not (0 <= in_s < out_s <= limit):
                raise InvariantViolation(
                    "trim-bounds", f"{path}.trim: ({in_s}, {out_s}) outside [0, {limit}]", id=shot_id
                )

    for asset_id, asset in project.assets.items():
        path = f"assets[{asset_id}]"
        if asset.asset_id != asset_id:
            raise IntegrityError(f"{path}.asset_id: key mismatch ({asset.asset_id})", id=asset_id)
        if asset.kind not in ("image", "video", "audio"):
            raise IntegrityError(f"{path}.kind: invalid value {asset.kind!r}", id=asset_id)
        needs_duration = asset.kind in ("video", "audio")
        if needs_duration and asset.duration_s is None:
            raise InvariantViolation("asset-duration", f"{path}.duration_s: required for {asset.kind}", id=asset_id)
        if not needs_duration and asset.duration_s is not None:
            raise InvariantViolation(
                "asset-duration", f"{path}.duration_s: must be absent for {asset.kind}", id=asset_id
            )
        if asset.duration_s is not None and asset.duration_s < 0:
            raise InvariantViolation("asset-duration", f"{path}.duration_s: negative", id=asset_id)
        if ".." in asset.uri or asset.uri.startswith("/"):
            raise InvariantViolation("asset-uri", f"{path}.uri: escapes the asset directory", id=asset_id)

    for si, suggestion in enumerate(project.suggestions):
        path = f"suggestions[{si}]"
        if suggestion.category not in SUGGESTION_CATEGORIES:
            raise IntegrityError(f"{path}.category: invalid value {suggestion.category!r}", id=suggestion.suggestion_id)
        if suggestion.level == "scene":
            if not 1 <= len(suggestion.tips) <= 2:
                raise InvariantViolation(
                    "scene-suggestion-tips", f"{path}.tips: expected 1-2, got {len(suggestion.tips)}",
                    id=suggestion.suggestion_id,
                )
            if suggestion.scene_id is not None and suggestion.scene_id in project.scenes:
                scene_shots = set(project.scenes[suggestion.scene_id].shots)
                for shot_id in suggestion.relevant_shot_ids:
                    if shot_id not in scene_shots:
                        raise IntegrityError(
                            f"{path}.relevant_shot_ids: {shot_id} not in scene {suggestion.scene_id}",
                            id=shot_id,
                        )


def _validate_correspondence_spans(scene: Scene, path: str) -> None:
    script_len = len(scene.script)
    prev_end = None
    seen: set[str] = set()
    for ci, corr in enumerate(scene.correspondences):
        start, end = corr.span
        if not (0 <= start < end <= script_len):
            raise InvariantViolation(
                "correspondence-span",
                f"{path}.correspondences[{ci}].span: ({start}, {end}) outside [0, {script_len})",
                id=corr.shot_id,
            )
        if prev_end is not None and start < prev_end:
            raise InvariantViolation(
                "correspondence-order",
                f"{path}.correspondences[{ci}]: span overlaps or precedes its predecessor",
                id=corr.shot_id,
            )
        if corr.shot_id in seen:
            raise InvariantViolation(
                "correspondence-shot-uniqueness",
                f"{path}.correspondences[{ci}]: shot {corr.shot_id} mapped twice",
                id=corr.shot_id,
            )
        seen.add(corr.shot_id)
        prev_end = end


def ids_in_use(project: Project) -> set[str]:
    ids: set[str] = set(project.scenes) | set(project.shots) | set(project.assets)
    ids.update(v.version_id for v in project.versions)
    ids.update(s.suggestion_id for s in project.suggestions)
    return ids


def ensure_known(project: Project, *, scenes: Iterable[str] = (), shots: Iterable[str] = ()) -> None:
    for scene_id in scenes:
        project.scene(scene_id)
    for shot_id in shots:
        project.shot(shot_id)
