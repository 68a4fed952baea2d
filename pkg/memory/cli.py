# memory/cli.py
"""Command-line surface: ingest, query, stats, export-graph, snapshot.

Exit codes: 0 success, 2 usage error, 3 transcript or config parse error,
4 engine state error (missing or corrupt snapshot, empty schema, ...).
"""
import functools
import json
from pathlib import Path

import click

from memory import get_logger
from memory.associative_graph import Sample, TopK
from memory.config import load_config
from memory.engine import GRAPH_FORMATS, MemoryEngine
from memory.errors import ConfigError, MemoryEngineError, SnapshotIOError, TranscriptError

logger = get_logger(__name__)

EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_STATE = 4


def handle_errors(command):
    """Map engine exceptions to the documented exit codes."""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return command(*args, **kwargs)
        except (TranscriptError, ConfigError) as e:
            click.echo(f"❌ {e}", err=True)
            ctx.exit(EXIT_PARSE)
        except MemoryEngineError as e:
            click.echo(f"❌ {type(e).__name__}: {e}", err=True)
            ctx.exit(EXIT_STATE)
    return wrapper


def _config(ctx):
    if "config" not in ctx.obj:
        config = load_config(ctx.obj["config_path"])
        get_logger("memory", ctx.obj["log_level"] or config.log_level)
        ctx.obj["config"] = config
    return ctx.obj["config"]


def _snapshot_path(ctx):
    return ctx.obj["snapshot_path"] or _config(ctx).snapshot_path


def _open_engine(ctx, required=True):
    config = _config(ctx)
    path = Path(_snapshot_path(ctx))
    if path.exists():
        return MemoryEngine.load(path, config)
    if required:
        raise SnapshotIOError(f"no engine snapshot at {path}; run `ingest` first")
    return MemoryEngine(config)


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="Engine config (TOML). Falls back to $SCHEMA_MEMORY_CONFIG, then defaults.")
@click.option("--snapshot", "snapshot_path", type=click.Path(dir_okay=False), default=None,
              help="Working snapshot file; overrides snapshot_path from the config.")
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
              default=None)
@click.pass_context
def cli(ctx, config_path, snapshot_path, log_level):
    """Schema-constrained long-term memory over dialogue transcripts."""
    ctx.ensure_object(dict)
    ctx.obj.update(config_path=config_path, snapshot_path=snapshot_path,
                   log_level=log_level.upper() if log_level else None)


@cli.command()
@click.argument("transcript", type=click.Path(exists=True))
@click.option("--fresh", is_flag=True, help="Ignore any existing snapshot and start from an empty engine.")
@click.option("--progress", is_flag=True, help="Show a progress bar while reading and ingesting.")
@click.option("--quiet", is_flag=True, help="Print only the final summary.")
@click.pass_context
@handle_errors
def ingest(ctx, transcript, fresh, progress, quiet):
    """Stream TRANSCRIPT (JSON lines) through the evolution loop and save the snapshot."""
    engine = MemoryEngine(_config(ctx)) if fresh else _open_engine(ctx, required=False)
    summary = engine.ingest_file(transcript, progress=progress)
    if not quiet:
        for report in summary.reports:
            click.echo(report.describe(engine.key_text))
    click.echo(summary.describe())
    engine.save(_snapshot_path(ctx))


@cli.command()
@click.argument("query")
@click.option("--k", "k_max", type=click.IntRange(min=1), default=None,
              help="Concept cap k_max; lowers the configured beam to fit unless --beam is given.")
@click.option("--hops", type=click.IntRange(min=0), default=None)
@click.option("--beam", type=click.IntRange(min=1), default=None)
@click.option("--temperature", type=click.FloatRange(min=0, min_open=True), default=None)
@click.option("--mode", type=click.Choice(["topk", "sample"]), default=None)
@click.option("--m", "topk_m", type=click.IntRange(min=1), default=None, help="Neighbors per node in topk mode.")
@click.option("--samples", type=click.IntRange(min=1), default=None, help="Draws per node in sample mode.")
@click.option("--seed", type=int, default=None, help="RNG seed for sample mode; defaults to the configured seed.")
@click.option("--seed-strategy", type=click.Choice(["constrained", "unconstrained"]), default=None)
@click.option("--answer", is_flag=True, help="Also run the synthesis hook on the assembled context.")
@click.option("--json", "as_json", is_flag=True, help="Print the result as a JSON record.")
@click.pass_context
@handle_errors
def query(ctx, query, k_max, hops, beam, temperature, mode, topk_m, samples, seed, seed_strategy, answer, as_json):
    """Recall evidence for QUERY from the saved engine."""
    engine = _open_engine(ctx)
    base = engine.config.recall
    mode_name = mode or ("sample" if isinstance(base.mode, Sample) else "topk")
    if mode_name == "sample":
        if seed is None and isinstance(base.mode, Sample):
            seed = base.mode.rng_seed
        if seed is None:
            raise click.UsageError("--mode sample needs --seed when the config runs topk")
        count = samples or (base.mode.count if isinstance(base.mode, Sample) else 1)
        propagation = Sample(count, seed)
    else:
        propagation = TopK(topk_m or (base.mode.m if isinstance(base.mode, TopK) else 3))
    if k_max is not None and beam is None and base.beam > k_max:
        # the cap must still admit every seed
        beam = k_max
    try:
        config = engine.config.with_recall(
            k_max=k_max, hops=hops, beam=beam, temperature=temperature,
            mode=propagation, seed_strategy=seed_strategy,
        )
    except ValueError as e:
        raise click.UsageError(str(e)) from e

    if answer:
        result, text = engine.answer(query, config.recall)
    else:
        result, text = engine.recall(query, config.recall), None
    if as_json:
        record = result.to_record()
        if text is not None:
            record["answer"] = text
        click.echo(json.dumps(record, indent=2, ensure_ascii=False))
        return
    click.echo(result.render(), nl=False)
    if text is not None:
        click.echo("answer:")
        click.echo(text)


@cli.command()
@click.option("--top", type=click.IntRange(min=0), default=10, show_default=True)
@click.pass_context
@handle_errors
def stats(ctx, top):
    """Turn count, schema size, edge count and the highest-IDF concepts."""
    engine = _open_engine(ctx)
    click.echo(engine.stats(top_n=top).describe(), nl=False)


@cli.command("export-graph")
@click.option("--format", "fmt", type=click.Choice(GRAPH_FORMATS), default="json", show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None, help="Write to a file instead of stdout.")
@click.pass_context
@handle_errors
def export_graph(ctx, fmt, output):
    """Export the associative graph as DOT or JSON."""
    engine = _open_engine(ctx)
    document = engine.export_graph(fmt)
    if output is None:
        click.echo(document, nl=False)
        return
    try:
        Path(output).write_text(document, encoding="utf-8")
    except OSError as e:
        raise SnapshotIOError(f"cannot write {output}: {e}") from e
    click.echo(f"✅ Graph written to {output}")


@cli.group()
def snapshot():
    """Copy engine state to or from snapshot files."""


@snapshot.command("save")
@click.argument("destination", type=click.Path(dir_okay=False))
@click.pass_context
@handle_errors
def snapshot_save(ctx, destination):
    """Write the working engine state to DESTINATION."""
    engine = _open_engine(ctx)
    engine.save(destination)
    click.echo(f"✅ Snapshot saved to {destination}")


@snapshot.command("load")
@click.argument("source", type=click.Path(dir_okay=False))
@click.pass_context
@handle_errors
def snapshot_load(ctx, source):
    """Verify SOURCE and make it the working engine state."""
    engine = MemoryEngine.load(source, _config(ctx))
    target = _snapshot_path(ctx)
    engine.save(target)
    click.echo(f"✅ Snapshot {source} loaded into {target}")
    click.echo(engine.stats().describe(), nl=False)
