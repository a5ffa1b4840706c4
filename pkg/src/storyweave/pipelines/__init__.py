"""AI-powered feature pipelines: prompt assembly, structured calls with
semantic repair, and id resolution back into the story graph."""

from .audio import generate_music, generate_narration, select_music
from .script import (
    dislike_suggestion,
    generate_scene_suggestions,
    generate_story_suggestions,
    refine_text,
    sync_notes_to_script,
)
from .story import (
    CompareEntry,
    CompareReport,
    NewSceneProposal,
    SequenceResult,
    accept_scene_proposal,
    add_contextual_scene,
    compare_story_variations,
    create_story_variation,
    describe_pending,
    describe_scene,
    describe_shot,
    group_shots_into_scenes,
    sequence_scenes,
)
from .visuals import (
    ImageVariationResult,
    ShotProposal,
    VideoVariationResult,
    VisualSequenceResult,
    accept_shot_proposal,
    add_contextual_shot,
    apply_video_variation,
    generate_image_variations,
    generate_video_variations,
    select_image_variation,
    sequence_visuals_in_scene,
    suggest_video_prompt,
)

__all__ = [
    "CompareEntry",
    "CompareReport",
    "ImageVariationResult",
    "NewSceneProposal",
    "SequenceResult",
    "ShotProposal",
    "VideoVariationResult",
    "VisualSequenceResult",
    "accept_scene_proposal",
    "accept_shot_proposal",
    "add_contextual_scene",
    "add_contextual_shot",
    "apply_video_variation",
    "compare_story_variations",
    "create_story_variation",
    "describe_pending",
    "describe_scene",
    "describe_shot",
    "dislike_suggestion",
    "generate_image_variations",
    "generate_music",
    "generate_narration",
    "generate_scene_suggestions",
    "generate_story_suggestions",
    "generate_video_variations",
    "group_shots_into_scenes",
    "refine_text",
    "select_image_variation",
    "select_music",
    "sequence_scenes",
    "sequence_visuals_in_scene",
    "suggest_video_prompt",
    "sync_notes_to_script",
]
