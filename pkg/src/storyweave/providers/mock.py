"""Deterministic mock provider: the offline stand-in for every model.

All outputs derive from a seeded hash of the canonicalized request, so an
identical request always yields byte-identical outputs.  The fabricators
are task-aware (dispatched on the schema title): groupings partition the
given ids, sequences permute them, alignments produce ordered spans over
the actual script, and so on, so every pipeline is fully exercisable with
no network.  Every call is appended to ``request_log`` for capture-style
assertions, and an in-flight watermark records observed concurrency.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
import threading
import time

from .. import media, tasks
from .base import (
    BaseProvider,
    ImageGenRequest,
    MusicRequest,
    RequestContext,
    SpeechRequest,
    StructuredRequest,
    VideoGenRequest,
)

# mock speech pace: 60 ms of narration per script character
SPEECH_MS_PER_CHAR = 60

_SUBJECTS = [
    "a weathered harbor wall", "two friends sharing a table", "a kite over the dunes",
    "the morning market crowd", "a dog chasing the tide", "lanterns strung between rooftops",
    "an empty train platform", "hands kneading dough", "a cyclist cresting the hill",
    "rain beading on a window", "the last light on the ridge", "a child counting shells",
]
_SETTINGS = [
    "at golden hour", "under a pale winter sky", "in a narrow side street",
    "beside the old pier", "deep in the birch forest", "on the crowded ferry deck",
    "inside the workshop", "along the coastal path", "at the kitchen table",
]
_MOODS = ["quiet", "restless", "joyful", "wistful", "tense", "playful", "serene", "curious"]
_SHOT_TYPES = [
    "wide establishing shot", "close-up", "medium shot", "over-the-shoulder view",
    "low-angle shot", "tracking shot", "aerial view", "detail insert",
]
_TITLE_HEADS = [
    "Arrival", "First Light", "Crossing", "Gathering", "Departure", "Interlude",
    "Homecoming", "Preparations", "The Long Walk", "Turning Point", "Celebration", "Quiet Hours",
]
_TITLE_TAILS = [
    "by the Water", "in the Old Town", "at Dusk", "Among Friends", "on the Road",
    "Before the Storm", "After the Rain", "in Slow Motion", "Up Close", "from Above",
]
_QUESTION_TEMPLATES = [
    "What did {subject} mean to you in that moment?",
    "How did the mood shift when you noticed {subject}?",
    "What happened just before {subject}, and why does it matter here?",
    "Which small detail of {subject} would your audience miss without you pointing it out?",
    "What were you hoping for while watching {subject}?",
    "How does {subject} connect to where the story ends up?",
]
_TIPS = [
    "Name one concrete sensory detail instead of summarizing.",
    "Try opening the line with the action, not the place.",
    "Let the narration pause here and let the visuals carry a beat.",
    "Contrast this moment with the one before it in a single phrase.",
    "Say what you felt, not what the viewer can already see.",
    "Anchor the line to a specific person or object in frame.",
]
_STRENGTHS = [
    "clear through-line from opening to close",
    "strong sense of place in the early scenes",
    "good rhythm between quiet and energetic moments",
    "the emotional turn lands where the footage is strongest",
]
_WEAKNESSES = [
    "the middle section lingers without new information",
    "the ending arrives before the tension resolves",
    "several scenes repeat the same visual idea",
    "the opening promises a thread the later scenes drop",
]
_CAMERA_MOVES = ["slow push-in", "gentle handheld drift", "locked-off tripod", "lateral dolly", "slow tilt upward"]
_LIGHTING = ["soft overcast daylight", "warm late-afternoon sun", "cool blue pre-dawn light", "practical lamplight"]
_STYLES = ["naturalistic documentary", "muted film-print palette", "crisp modern travelogue", "grainy home-movie feel"]
_ACTIONS = [
    "the subject turns toward the camera", "wind stirs the foreground",
    "a figure crosses the frame left to right", "the focus racks from near to far",
]
_REFINE_TAILS = [
    "Hold on the small details a beat longer.",
    "Let the sentence land, then cut.",
    "Lead with the feeling, follow with the fact.",
    "Keep it plain; the image does the rest.",
    "End on the concrete noun.",
]


def extract_block(text: str, name: str) -> str | None:
    match = re.search(rf"<<{name}\n(.*?)\n{name}>>", text, re.DOTALL)
    return match.group(1) if match else None


class MockProvider(BaseProvider):
    name = "mock"

    def __init__(self, seed: int = 0, latency_s: float = 0.0) -> None:
        self.seed = seed
        self.latency_s = latency_s
        self.request_log: list[dict] = []
        self._lock = threading.Lock()
        self._inflight = 0
        self.max_inflight = 0

    # -- bookkeeping

    def _enter(self, kind: str, payload: dict) -> None:
        with self._lock:
            self.request_log.append({"kind": kind, "payload": payload})
            self._inflight += 1
            self.max_inflight = max(self.max_inflight, self._inflight)
        if self.latency_s:
            time.sleep(self.latency_s)

    def _exit(self) -> None:
        with self._lock:
            self._inflight -= 1

    def _digest(self, kind: str, payload: dict) -> str:
        blob = json.dumps({"seed": self.seed, "kind": kind, "payload": payload}, sort_keys=True)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    # -- structured completion

    def complete(self, req: StructuredRequest, ctx: RequestContext) -> str:
        payload = {
            "system": req.system_prompt,
            "parts": [ctx.part_payload(p) for p in req.user_parts],
            "schema": req.schema,
            "creativity": req.creativity,
        }
        self._enter("structured", payload)
        try:
            digest = self._digest("structured", payload)
            rng = random.Random(digest)
            prompt_text = "\n".join(p.text for p in req.user_parts if p.text is not None)
            image_checksums = [
                ctx.ref(p.image).checksum for p in req.user_parts if p.image is not None
            ]
            title = req.schema.get("title", "")
            value = self._fabricate_task(title, req.schema, prompt_text, image_checksums, rng)
            if value is None:
                value = _fabricate_generic(req.schema, rng)
            return json.dumps(value, sort_keys=True)
        finally:
            self._exit()

    def _fabricate_task(self, title, schema, prompt_text, image_checksums, rng):
        if title == tasks.SHOT_DESCRIPTION:
            ck = image_checksums[0][:8] if image_checksums else "no-media"
            return {"description": _describe(rng, ck)}
        if title == tasks.SCENE_DESCRIPTION or title == tasks.CONTEXTUAL_SCENE:
            return {"title": _title(rng), "description": _sentence(rng)}
        if title == tasks.SHOT_GROUPING:
            ids = _enum_at(schema, "scenes", "shot_ids")
            return {"scenes": _partition_scenes(ids, rng)}
        if title == tasks.SCENE_SEQUENCE:
            ids = _enum_at(schema, "order")
            order = list(ids)
            rng.shuffle(order)
            proposals = [
                {"title": _title(rng), "description": _sentence(rng), "index": rng.randint(0, len(order))}
                for _ in range(rng.randint(0, 2))
            ]
            return {"order": order, "proposals": proposals}
        if title == tasks.STORY_VARIATION:
            ids = _enum_at(schema, "scenes", "shot_ids")
            keep = [i for i in ids if rng.random() < 0.85] or list(ids[:1])
            return {"name": f"{_title(rng)} (variation)", "scenes": _partition_scenes(keep, rng)}
        if title == tasks.VARIATION_COMPARE:
            ids = _enum_at(schema, "entries", "version_id")
            return {
                "entries": [
                    {
                        "version_id": vid,
                        "summary": _sentence(rng),
                        "strengths": rng.sample(_STRENGTHS, rng.randint(1, 2)),
                        "weaknesses": rng.sample(_WEAKNESSES, rng.randint(1, 2)),
                    }
                    for vid in ids
                ]
            }
        if title in (tasks.STORY_SUGGESTIONS, tasks.SCENE_SUGGESTIONS):
            return self._fabricate_suggestions(schema, rng)
        if title == tasks.NOTES_SEGMENTATION:
            ids = _enum_at(schema, "segments", "scene_id")
            notes = extract_block(prompt_text, "NOTES") or ""
            chunks = _split_text(notes, len(ids))
            return {"segments": [{"scene_id": sid, "text": chunk} for sid, chunk in zip(ids, chunks)]}
        if title == tasks.TEXT_REFINEMENT:
            original = (extract_block(prompt_text, "ORIGINAL") or "the line").strip()
            tails = rng.sample(_REFINE_TAILS, 3)
            return {"options": [f"{original.rstrip('.')}. {tail}" for tail in tails]}
        if title == tasks.VISUAL_SEQUENCE:
            ids = _enum_at(schema, "order")
            order = list(ids)
            rng.shuffle(order)
            proposals = [
                {
                    "index": rng.randint(0, len(order)),
                    "image_prompt": _image_prompt(rng),
                    "description": _sentence(rng),
                    "explanation": _explanation(rng),
                }
                for _ in range(rng.randint(0, 2))
            ]
            return {"order": order, "proposals": proposals}
        if title == tasks.SHOT_IDEAS:
            return {
                "ideas": [
                    {"image_prompt": _image_prompt(rng), "description": _sentence(rng), "explanation": _explanation(rng)}
                    for _ in range(3)
                ]
            }
        if title == tasks.IMAGE_VARIATION_IDEAS:
            items = schema["properties"]["ideas"]
            count = items.get("minItems", 1)
            return {
                "ideas": [
                    {"edit_prompt": _image_prompt(rng), "description": _sentence(rng), "explanation": _explanation(rng)}
                    for _ in range(count)
                ]
            }
        if title == tasks.VIDEO_PROMPT_FIELDS:
            return {
                "camera_movement": rng.choice(_CAMERA_MOVES),
                "lighting": rng.choice(_LIGHTING),
                "style": rng.choice(_STYLES),
                "action": rng.choice(_ACTIONS),
            }
        if title == tasks.AUGMENTED_VIDEO_PROMPT:
            return {
                "prompt": (
                    f"{rng.choice(_CAMERA_MOVES)}, {rng.choice(_LIGHTING)}; "
                    f"{rng.choice(_ACTIONS)}; {rng.choice(_STYLES)}."
                )
            }
        if title == tasks.SCRIPT_ALIGNMENT:
            ids = _enum_at(schema, "correspondences", "shot_id")
            script = extract_block(prompt_text, "SCRIPT") or ""
            return {"correspondences": _align_spans(ids, script, rng)}
        return None

    def _fabricate_suggestions(self, schema, rng):
        items = schema["properties"]["suggestions"]
        low = schema["properties"]["suggestions"].get("minItems", 1)
        high = schema["properties"]["suggestions"].get("maxItems", low)
        count = rng.randint(low, high)
        categories = items["items"]["properties"]["category"].get("enum", ["other"])
        shot_enum = None
        props = items["items"]["properties"]
        if "relevant_shot_ids" in props:
            shot_enum = props["relevant_shot_ids"]["items"].get("enum", [])
        out = []
        for _ in range(count):
            suggestion = {
                "category": rng.choice(categories),
                "text": rng.choice(_QUESTION_TEMPLATES).format(subject=rng.choice(_SUBJECTS)),
                "explanation": _explanation(rng),
                "tips": rng.sample(_TIPS, rng.randint(1, 2)),
            }
            if shot_enum is not None:
                k = rng.randint(1, min(3, len(shot_enum))) if shot_enum else 0
                suggestion["relevant_shot_ids"] = rng.sample(shot_enum, k) if k else []
            out.append(suggestion)
        return {"suggestions": out}

    # -- media

    def generate_images(self, req: ImageGenRequest, ctx: RequestContext) -> list[bytes]:
        base_ck = ctx.ref(req.base_image).checksum if req.base_image else None
        payload = {"prompt": req.prompt, "n": req.n, "seed": req.seed, "base_image_checksum": base_ck}
        self._enter("image", payload)
        try:
            width, height = req.width, req.height
            if req.base_image:
                ref = ctx.ref(req.base_image)
                if ref.width and ref.height:
                    width, height = ref.width, ref.height
            return [
                media.make_placeholder_png(self._digest("image", {**payload, "i": i}), width, height)
                for i in range(req.n)
            ]
        finally:
            self._exit()

    def generate_videos(self, req: VideoGenRequest, ctx: RequestContext) -> list[bytes]:
        keyframe = ctx.ref(req.keyframe)
        payload = {
            "prompt": req.prompt,
            "n": req.n,
            "seed": req.seed,
            "keyframe_checksum": keyframe.checksum,
            "duration_hint_s": req.duration_hint_s,
        }
        self._enter("video", payload)
        try:
            width = keyframe.width or 640
            height = keyframe.height or 360
            return [
                media.write_stub_mp4(
                    req.duration_hint_s,
                    width,
                    height,
                    payload=bytes.fromhex(self._digest("video", {**payload, "i": i})),
                )
                for i in range(req.n)
            ]
        finally:
            self._exit()

    def synthesize_speech(self, req: SpeechRequest, ctx: RequestContext) -> list[bytes]:
        payload = {"script": req.script, "voice": req.voice, "n": req.n, "seed": req.seed}
        self._enter("speech", payload)
        try:
            duration_s = len(req.script) * SPEECH_MS_PER_CHAR / 1000.0
            return [
                media.make_digest_wav(duration_s, self._digest("speech", {**payload, "i": i}))
                for i in range(req.n)
            ]
        finally:
            self._exit()

    def synthesize_music(self, req: MusicRequest, ctx: RequestContext) -> list[bytes]:
        payload = {"prompt": req.prompt, "duration_s": req.duration_s, "n": req.n, "seed": req.seed}
        self._enter("music", payload)
        try:
            return [
                media.make_digest_wav(req.duration_s, self._digest("music", {**payload, "i": i}))
                for i in range(req.n)
            ]
        finally:
            self._exit()


# ---------------------------------------------------------------------------
# Fabrication helpers


def _title(rng: random.Random) -> str:
    return f"{rng.choice(_TITLE_HEADS)} {rng.choice(_TITLE_TAILS)}"


def _sentence(rng: random.Random) -> str:
    return f"{rng.choice(_SUBJECTS).capitalize()} {rng.choice(_SETTINGS)}, {rng.choice(_MOODS)} and unhurried."


def _describe(rng: random.Random, checksum_prefix: str) -> str:
    return (
        f"A {rng.choice(_MOODS)} {rng.choice(_SHOT_TYPES)} of {rng.choice(_SUBJECTS)} "
        f"{rng.choice(_SETTINGS)} (source {checksum_prefix})."
    )


def _explanation(rng: random.Random) -> str:
    return (
        f"Adds a {rng.choice(_MOODS)} beat that bridges the surrounding moments "
        f"and keeps the narrative moving."
    )


def _image_prompt(rng: random.Random) -> str:
    return (
        f"{rng.choice(_SHOT_TYPES)} of {rng.choice(_SUBJECTS)} {rng.choice(_SETTINGS)}, "
        f"{rng.choice(_LIGHTING)}, {rng.choice(_STYLES)}"
    )


def _partition_scenes(ids: list[str], rng: random.Random) -> list[dict]:
    shuffled = list(ids)
    rng.shuffle(shuffled)
    n = len(shuffled)
    k = 1 if n <= 1 else rng.randint(1, min(4, n))
    cuts = sorted(rng.sample(range(1, n), k - 1)) if k > 1 else []
    bounds = [0] + cuts + [n]
    return [
        {"title": _title(rng), "description": _sentence(rng), "shot_ids": shuffled[a:b]}
        for a, b in zip(bounds, bounds[1:])
    ]


def _split_text(text: str, buckets: int) -> list[str]:
    if buckets <= 0:
        return []
    sentences = [s for s in re.split(r"(?<=[.!?])\s+", text.strip()) if s]
    if not sentences:
        return [""] * buckets
    chunks: list[str] = []
    per = len(sentences) / buckets
    for i in range(buckets):
        start = round(i * per)
        end = round((i + 1) * per)
        chunks.append(" ".join(sentences[start:end]))
    return chunks


def _align_spans(ids: list[str], script: str, rng: random.Random) -> list[dict]:
    length = len(script)
    if length == 0 or not ids:
        return []
    m = min(len(ids), length)
    chosen = ids[:m]
    cuts = sorted(rng.sample(range(1, length), m - 1)) if m > 1 else []
    bounds = [0] + cuts + [length]
    out = []
    for k, (shot_id, (a, b)) in enumerate(zip(chosen, zip(bounds, bounds[1:]))):
        start, end = a, b
        # occasionally leave an uncovered gap before an inner span
        if k > 0 and end - start > 2 and rng.random() < 0.3:
            start += min(end - start - 1, rng.randint(1, 2))
        out.append({"shot_id": shot_id, "start": start, "end": end})
    return out


def _enum_at(schema: dict, *path: str) -> list[str]:
    """Pull the candidate-id enum embedded in an array schema."""
    node = schema
    for key in path:
        props = node.get("properties", node)
        node = props[key]
        if node.get("type") == "array":
            node = node["items"]
    return list(node.get("enum", []))


def _fabricate_generic(schema: dict, rng: random.Random):
    stype = schema.get("type")
    if "enum" in schema:
        return rng.choice(schema["enum"])
    if stype == "object":
        return {
            key: _fabricate_generic(sub, rng)
            for key, sub in schema.get("properties", {}).items()
        }
    if stype == "array":
        low = schema.get("minItems", 1)
        high = schema.get("maxItems", max(low, 2))
        items = schema.get("items", {"type": "string"})
        if "enum" in items and schema.get("uniqueItems"):
            pool = list(items["enum"])
            rng.shuffle(pool)
            return pool[: min(len(pool), rng.randint(min(low, len(pool)), min(high, len(pool))))]
        return [_fabricate_generic(items, rng) for _ in range(rng.randint(low, high))]
    if stype == "integer":
        return rng.randint(schema.get("minimum", 0), schema.get("maximum", 9))
    if stype == "number":
        return round(rng.uniform(schema.get("minimum", 0.0), schema.get("maximum", 1.0)), 3)
    if stype == "boolean":
        return rng.random() < 0.5
    return _sentence(rng)
