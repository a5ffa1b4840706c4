"""storyweave: an authoring engine for hybrid video stories.

Blends user-captured media with contextually generated clips: organize
shots into scenes, surface narrative gaps, generate connective keyframes
and clips, align visuals to the voiceover script, and compile a rough cut.
"""

__version__ = "0.1.0"
