"""Structured-call task names, shared by the pipelines (schema titles) and
the mock provider (fabrication dispatch)."""

SHOT_DESCRIPTION = "shot_description"
SCENE_DESCRIPTION = "scene_description"
SHOT_GROUPING = "shot_grouping"
SCENE_SEQUENCE = "scene_sequence"
CONTEXTUAL_SCENE = "contextual_scene"
STORY_VARIATION = "story_variation"
VARIATION_COMPARE = "variation_compare"
STORY_SUGGESTIONS = "story_suggestions"
SCENE_SUGGESTIONS = "scene_suggestions"
NOTES_SEGMENTATION = "notes_segmentation"
TEXT_REFINEMENT = "text_refinement"
VISUAL_SEQUENCE = "visual_sequence"
SHOT_IDEAS = "shot_ideas"
IMAGE_VARIATION_IDEAS = "image_variation_ideas"
VIDEO_PROMPT_FIELDS = "video_prompt_fields"
AUGMENTED_VIDEO_PROMPT = "augmented_video_prompt"
SCRIPT_ALIGNMENT = "script_alignment"
