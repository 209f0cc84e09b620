"""Command-line entry point: KB maintenance, headless scripted assessments,
and the HTTP service.

Exit codes: 0 success, 1 validation/domain failure, 2 usage error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import assessment, reporting, store
from .errors import SramdaError
from .model import AttackRecord, LAYER_ORDER, MOTIVATION_ORDER, ORIGIN_ORDER


def _load_kb_file(path: str):
    return store.load_kb(Path(path).read_bytes())


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


@click.group()
@click.version_option(package_name="sramda")
def main():
    """Risk assessment workbench for DLT-based applications."""


@main.group()
def kb():
    """Knowledge-base maintenance commands."""


@kb.command("validate")
@click.argument("kb_file", type=click.Path(exists=True, dir_okay=False))
def kb_validate(kb_file):
    """Load and fully validate a KB file."""
    try:
        loaded = _load_kb_file(kb_file)
    except SramdaError as exc:
        _fail(str(exc))
    click.echo(f"ok: {len(loaded)} records, schema v{loaded.schema_version}")


@kb.command("stats")
@click.argument("kb_file", type=click.Path(exists=True, dir_okay=False))
def kb_stats(kb_file):
    """Print KB counts and origin shares."""
    try:
        loaded = _load_kb_file(kb_file)
    except SramdaError as exc:
        _fail(str(exc))
    stats = store.compute_stats(loaded)
    click.echo(f"total: {stats.total}")
    click.echo("by layer:")
    for layer in LAYER_ORDER:
        click.echo(f"  {layer.value}: {stats.by_layer[layer]}")
    click.echo("by motivation:")
    for category in MOTIVATION_ORDER:
        click.echo(f"  {category.value}: {stats.by_motivation[category]}")
    click.echo("by origin:")
    for origin in ORIGIN_ORDER:
        share = ""
        if stats.origin_shares is not None:
            share = f" ({stats.origin_shares[origin]:.2f}%)"
        click.echo(f"  {origin.value}: {stats.origin_counts[origin]}{share}")


@kb.command("query")
@click.argument("kb_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--layer", "layers", multiple=True, help="Layer facet (repeatable).")
@click.option("--motivation", "motivations", multiple=True, help="Motivation facet (repeatable).")
@click.option("--asset", "assets", multiple=True, help="Harmed-asset facet (repeatable).")
@click.option("--text", default=None, help="Free-text needle (name, synonyms, description).")
def kb_query(kb_file, layers, motivations, assets, text):
    """Filter the KB; prints one matching slug per line, sorted."""
    try:
        loaded = _load_kb_file(kb_file)
        query = store.parse_query(
            layers=list(layers) or None,
            motivations=list(motivations) or None,
            assets=list(assets) or None,
            text=text,
        )
        for record in store.filter_records(loaded, query):
            click.echo(record.id)
    except SramdaError as exc:
        _fail(str(exc))


@kb.command("add")
@click.argument("kb_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--record", "record_file", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON file with a single attack record object.")
@click.option("--out", "out_file", default=None, type=click.Path(dir_okay=False),
              help="Write the grown KB here instead of updating KB_FILE in place.")
def kb_add(kb_file, record_file, out_file):
    """Add one record to a KB file."""
    try:
        loaded = _load_kb_file(kb_file)
        data = json.loads(Path(record_file).read_text(encoding="utf-8"))
        record = AttackRecord.from_dict(data)
        grown = store.add_record(loaded, record)
    except (SramdaError, json.JSONDecodeError) as exc:
        _fail(str(exc))
    Path(out_file or kb_file).write_bytes(store.save_kb(grown))
    click.echo(f"added {record.id}; KB now has {len(grown)} records")


@main.group()
def assess():
    """Headless assessment commands."""


@assess.command("run")
@click.argument("script_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--kb", "kb_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "report_file", default=None, type=click.Path(dir_okay=False),
              help="Write the markdown report here (default: stdout).")
@click.option("--export-session", "export_file", default=None, type=click.Path(dir_okay=False),
              help="Also write the session export document.")
def assess_run(script_file, kb_file, report_file, export_file):
    """Replay a scripted session against a KB and emit its report."""
    try:
        loaded = _load_kb_file(kb_file)
        doc = json.loads(Path(script_file).read_text(encoding="utf-8"))
        session, _ = assessment.run_script(doc, loaded)
    except (SramdaError, json.JSONDecodeError) as exc:
        _fail(str(exc))
    report = reporting.render_markdown(session)
    if report_file:
        Path(report_file).write_text(report, encoding="utf-8")
    else:
        click.echo(report)
    if export_file:
        Path(export_file).write_bytes(reporting.export_session(session))
    if session.recommendation is not None:
        click.echo(
            f"session {session.id}: most-harmed asset(s): "
            f"{', '.join(session.recommendation.top_assets)}",
            err=True,
        )


@main.command("serve")
@click.option("--bind", default="127.0.0.1:8000", show_default=True,
              help="host:port to listen on.")
@click.option("--kb", "kb_file", default=None, type=click.Path(exists=True, dir_okay=False),
              help="KB path (default: the bundled seed KB).")
@click.option("--data-dir", default="./sramda-data", show_default=True,
              help="Session/KB persistence directory (env SRAMDA_DATA_DIR overrides).")
def serve(bind, kb_file, data_dir):
    """Run the HTTP service."""
    import uvicorn

    from .server import RiskService, create_app, resolve_data_dir

    host, _, port = bind.partition(":")
    try:
        service = RiskService(kb_path=kb_file, data_dir=resolve_data_dir(data_dir))
    except SramdaError as exc:
        _fail(str(exc))
    app = create_app(service)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or "8000"), log_level="info")


if __name__ == "__main__":
    main()
