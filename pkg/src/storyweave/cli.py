"""Headless driver: ingestion, pipeline execution, compilation, serving.

stdout carries exactly one machine-readable JSON document per run (canonical
formatting, so fixed-seed mock runs are byte-reproducible); human-readable
progress goes to stderr.  Errors exit nonzero with the structured error on
stdout.
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path

import click

from . import alignment, compiler, pipelines
from .errors import StoryweaveError
from .model import canonical_json
from .mutations import Mutation
from .session import Session


def emit(payload: dict) -> None:
    sys.stdout.write(canonical_json(payload))


def note(message: str) -> None:
    click.echo(message, err=True)


def cli_op(fn):
    """Uniform error contract: structured error on stdout, exit 1."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except StoryweaveError as exc:
            emit({"error": exc.to_dict()})
            raise SystemExit(1)

    return wrapper


@click.group()
@click.option("--project", "-p", "project_root", default=".", help="Project directory.")
@click.option("--seed", type=int, default=None, help="Override the provider seed.")
@click.option("--provider", default=None, type=click.Choice(["mock", "http"]), help="Provider backend.")
@click.pass_context
def main(ctx, project_root, seed, provider):
    """Authoring engine for hybrid video stories."""
    ctx.obj = {"root": Path(project_root), "seed": seed, "provider": provider}


def open_session(ctx) -> Session:
    overrides = {k: v for k, v in ctx.obj.items() if k in ("seed", "provider") and v is not None}
    return Session.open(ctx.obj["root"], **overrides)


@main.command()
@click.option("--name", default="project", help="Project id.")
@click.pass_context
@cli_op
def init(ctx, name):
    """Create an empty project in the project directory."""
    overrides = {k: v for k, v in ctx.obj.items() if k in ("seed", "provider") and v is not None}
    session = Session.create(ctx.obj["root"], project_id=name, **overrides)
    note(f"initialized project {name}")
    emit({"project_id": session.project.project_id, "revision": session.revision})


@main.command()
@click.argument("paths", nargs=-1, required=True)
@click.pass_context
@cli_op
def ingest(ctx, paths):
    """Copy media into the project and register ungrouped shots."""
    session = open_session(ctx)
    report = session.store.ingest(session.project, session.apply, list(paths))
    session.save()
    note(f"ingested {len(report.added)} assets ({len(report.skipped)} skipped)")
    emit({"report": report.to_dict(), "revision": session.revision})


@main.command()
@click.option("--force", is_flag=True, help="Re-describe shots that already have descriptions.")
@click.pass_context
@cli_op
def describe(ctx, force):
    """Run pending shot descriptions."""
    session = open_session(ctx)
    descriptions = pipelines.describe_pending(session, force=force)
    session.save()
    note(f"described {len(descriptions)} shots")
    emit({"descriptions": descriptions, "revision": session.revision})


@main.command()
@click.pass_context
@cli_op
def group(ctx):
    """Organize ungrouped shots into scenes."""
    session = open_session(ctx)
    scenes = pipelines.group_shots_into_scenes(session)
    session.save()
    note(f"created {len(scenes)} scenes")
    emit({"scenes": [s.to_dict() for s in scenes], "revision": session.revision})


@main.command()
@click.option("--accept-proposals", is_flag=True, help="Materialize proposed connective scenes.")
@click.pass_context
@cli_op
def sequence(ctx, accept_proposals):
    """Order the active version's scenes into a storyline."""
    session = open_session(ctx)
    result = pipelines.sequence_scenes(session)
    accepted = []
    if accept_proposals:
        for proposal in result.proposals:
            accepted.append(pipelines.accept_scene_proposal(session, proposal).to_dict())
    session.save()
    note(f"sequenced {len(result.order)} scenes, {len(result.proposals)} proposals")
    emit({"result": result.to_dict(), "accepted": accepted, "revision": session.revision})


@main.command()
@click.option("--prompt", required=True, help="Variation request, e.g. 'focus on nature imagery'.")
@click.pass_context
@cli_op
def variation(ctx, prompt):
    """Create an alternate story version from the existing shots."""
    session = open_session(ctx)
    version = pipelines.create_story_variation(session, prompt)
    session.save()
    note(f"created variation {version.version_id}")
    emit({"version": version.to_dict(), "revision": session.revision})


@main.command()
@click.argument("version_ids", nargs=-1)
@click.pass_context
@cli_op
def compare(ctx, version_ids):
    """Compare story versions (all of them by default)."""
    session = open_session(ctx)
    report = pipelines.compare_story_variations(session, list(version_ids) or None)
    session.save()
    emit({"report": report.to_dict(), "revision": session.revision})


@main.command()
@click.option("--level", type=click.Choice(["story", "scene"]), default="story")
@click.option("--scene", "scene_id", default=None, help="Scene id (required for --level scene).")
@click.option(
    "--category",
    default=None,
    type=click.Choice(
        ["structure", "plot", "imagery", "character", "dialogue", "pacing", "emotion", "setting", "theme", "other"]
    ),
)
@click.pass_context
@cli_op
def suggest(ctx, level, scene_id, category):
    """Generate Socratic script suggestions."""
    session = open_session(ctx)
    if level == "scene":
        if not scene_id:
            raise click.UsageError("--level scene requires --scene")
        suggestions = pipelines.generate_scene_suggestions(session, scene_id, category=category)
    else:
        suggestions = pipelines.generate_story_suggestions(session, category=category)
    session.save()
    note(f"{len(suggestions)} {level} suggestions")
    emit({"suggestions": [s.to_dict() for s in suggestions], "revision": session.revision})


@main.command("sync-notes")
@click.option("--confirm", is_flag=True, help="Overwrite existing scene scripts.")
@click.pass_context
@cli_op
def sync_notes(ctx, confirm):
    """Segment the editor notes into per-scene scripts."""
    session = open_session(ctx)
    segments = pipelines.sync_notes_to_script(session, confirm=confirm)
    session.save()
    emit({"segments": segments, "revision": session.revision})


@main.command()
@click.argument("original")
@click.option("--prompt", default=None, help="Refinement request.")
@click.pass_context
@cli_op
def refine(ctx, original, prompt):
    """Produce three refined versions of a passage."""
    session = open_session(ctx)
    options = pipelines.refine_text(session, original, user_prompt=prompt)
    session.save()
    emit({"options": options, "revision": session.revision})


@main.command("expand-scene")
@click.argument("scene_id")
@click.option("--accept", is_flag=True, help="Accept the first candidate of each proposal.")
@click.pass_context
@cli_op
def expand_scene(ctx, scene_id, accept):
    """Sequence a scene's visuals and generate new-shot proposals."""
    session = open_session(ctx)
    result = pipelines.sequence_visuals_in_scene(session, scene_id)
    accepted = []
    if accept:
        for proposal in result.proposals:
            accepted.append(pipelines.accept_shot_proposal(session, proposal, 0).to_dict())
    session.save()
    note(f"ordered {len(result.order)} shots, {len(result.proposals)} proposals")
    emit({"result": result.to_dict(), "accepted": accepted, "revision": session.revision})


@main.command("contextual-shot")
@click.argument("scene_id")
@click.option("--between", required=True, help="Neighbor shot ids as 'prev,next' (either may be empty).")
@click.option("--prompt", default=None, help="Creative guidance.")
@click.option("--accept", type=int, default=None, help="Accept candidate N immediately.")
@click.pass_context
@cli_op
def contextual_shot(ctx, scene_id, between, prompt, accept):
    """Propose a connective shot between two neighbors."""
    session = open_session(ctx)
    parts = between.split(",")
    prev_id = parts[0].strip() or None
    next_id = parts[1].strip() or None if len(parts) > 1 else None
    proposal = pipelines.add_contextual_shot(
        session, scene_id, prev_shot_id=prev_id, next_shot_id=next_id, user_prompt=prompt
    )
    accepted = None
    if accept is not None:
        accepted = pipelines.accept_shot_proposal(session, proposal, accept).to_dict()
    session.save()
    emit({"proposal": proposal.to_dict(), "accepted": accepted, "revision": session.revision})


@main.command()
@click.argument("shot_id")
@click.option("--prompt", default=None, help="Creative guidance for the motion.")
@click.option("--annotation", default=None, help="Asset id of an annotated raster.")
@click.option("--apply/--no-apply", "apply_first", default=True, help="Apply the first variant.")
@click.pass_context
@cli_op
def animate(ctx, shot_id, prompt, annotation, apply_first):
    """Animate a still shot into video variants."""
    session = open_session(ctx)
    result = pipelines.generate_video_variations(
        session, shot_id, annotation_asset_id=annotation, user_prompt=prompt
    )
    applied = None
    if apply_first:
        applied = pipelines.apply_video_variation(session, result, 0).to_dict()
    session.save()
    note(f"{len(result.candidates)} video variants")
    emit({"result": result.to_dict(), "applied": applied, "revision": session.revision})


@main.command()
@click.argument("scene_id")
@click.pass_context
@cli_op
def align(ctx, scene_id):
    """Align a scene's shots to script spans."""
    session = open_session(ctx)
    correspondences = alignment.auto_align(session, scene_id)
    session.save()
    emit({"correspondences": [c.to_dict() for c in correspondences], "revision": session.revision})


@main.command()
@click.argument("scene_id")
@click.pass_context
@cli_op
def narrate(ctx, scene_id):
    """Synthesize narration for a scene's script."""
    session = open_session(ctx)
    ref = pipelines.generate_narration(session, scene_id)
    session.save()
    emit({"narration": ref.to_dict(), "revision": session.revision})


@main.command()
@click.argument("scene_id", required=False)
@click.option("--story", is_flag=True, help="Compile the whole active version.")
@click.option("--render", "do_render", is_flag=True, help="Invoke the configured render command.")
@click.option("--out", default="renders", help="Output directory (project-relative).")
@click.pass_context
@cli_op
def compile(ctx, scene_id, story, do_render, out):
    """Build the EDL (and optionally render the rough cut)."""
    session = open_session(ctx)
    project = session.project
    if story:
        edl = compiler.compile_story(project)
        name = f"story_{project.active_version}"
    else:
        if not scene_id:
            raise click.UsageError("provide a scene id or --story")
        edl = compiler.build_edl(project, project.scene(scene_id))
        name = scene_id
    out_dir = session.store.root / out
    mode = "render" if do_render else "edl_only"
    path = compiler.render(
        edl,
        out_dir,
        mode=mode,
        name=name,
        render_command=session.config.render_command,
        project_root=session.store.root,
    )
    note(f"compiled {name}: {edl.total_duration_s}s")
    emit(
        {
            "edl": edl.to_dict(),
            "output": str(path.relative_to(session.store.root)),
            "revision": session.revision,
        }
    )


@main.command()
@click.option("--port", type=int, default=8787)
@click.option("--host", default="127.0.0.1")
@click.pass_context
@cli_op
def serve(ctx, port, host):
    """Serve the HTTP API and event stream for this project."""
    from .service import serve as run_server

    note(f"serving on {host}:{port}")
    overrides = {k: v for k, v in ctx.obj.items() if k in ("seed", "provider") and v is not None}
    run_server(ctx.obj["root"], host=host, port=port, **overrides)


@main.command()
@click.pass_context
@cli_op
def undo(ctx):
    """Undo the last mutation."""
    session = open_session(ctx)
    record = session.undo()
    session.save()
    emit({"undone": record.inverse, "revision": session.revision})


@main.command()
@click.option("--text", required=True)
@click.pass_context
@cli_op
def notes(ctx, text):
    """Set the editor notes (story context)."""
    session = open_session(ctx)
    session.apply(Mutation("set_story_context", {"text": text}))
    session.save()
    emit({"story_context": text, "revision": session.revision})


if __name__ == "__main__":
    main()
