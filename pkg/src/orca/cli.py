"""Command-line entry points.

Configuration comes from an optional TOML file::

    state_dir = "state"

    [provider]
    kind = "mock"                # or "real"
    mock_script_path = "replies.script"

    [databases]
    shop = "sqlite:///shop.db"

CLI flags override the file; with no file everything defaults to a mock
provider with an empty script and ``state/`` as the state directory.
"""

from __future__ import annotations

import functools
import json
import sqlite3

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import click

from . import catalog as catalog_mod
from .analyzer import CausalQuery, analyze, report_to_dict
from .engine import parse_graph_text
from .errors import OrcaError
from .evaluation import run_task
from .explorer import explore as explore_table
from .providers import ProviderConfig, build_provider
from .recommender import DEFAULT_K, recommend as recommend_tables
from .reef import (
    BASE_SIZES,
    DgpConfig,
    compute_ground_truth,
    generate,
    load_into,
    save_manifest,
)
from .service import create_app
from .sessions import SessionManager
from .text2sql import MAX_ATTEMPTS_PER_ROUND, run_pipeline

DEFAULT_STATE_DIR = "state"


@dataclass
class Settings:
    state_dir: str = DEFAULT_STATE_DIR
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    databases: dict[str, str] = field(default_factory=dict)


def load_settings(
    config_path: Optional[str],
    state_dir: Optional[str] = None,
    mock_script: Optional[str] = None,
) -> Settings:
    data: dict = {}
    if config_path:
        data = tomllib.loads(Path(config_path).read_text())
    provider_keys = {f.name for f in fields(ProviderConfig)}
    provider_raw = {
        k: v for k, v in (data.get("provider") or {}).items() if k in provider_keys
    }
    settings = Settings(
        state_dir=state_dir or data.get("state_dir", DEFAULT_STATE_DIR),
        provider=ProviderConfig(**provider_raw),
        databases={str(k): str(v) for k, v in (data.get("databases") or {}).items()},
    )
    if mock_script:
        settings.provider.kind = "mock"
        settings.provider.mock_script_path = mock_script
    return settings


def friendly_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except OrcaError as exc:
            raise click.ClickException(f"{type(exc).__name__}: {exc}") from exc

    return wrapper


def _sqlite_path(conn_string: str) -> str:
    if conn_string.startswith("sqlite:///"):
        return conn_string[len("sqlite:///"):]
    return conn_string


def _default_database_id(conn_string: str) -> str:
    path = _sqlite_path(conn_string)
    return "memory" if path == ":memory:" else Path(path).stem


def _pick_database(settings: Settings, database_id: Optional[str]) -> str:
    if database_id is not None:
        return database_id
    if len(settings.databases) == 1:
        return next(iter(settings.databases))
    known = ", ".join(sorted(settings.databases)) or "(none configured)"
    raise click.ClickException(
        f"--db is required; configured databases: {known}"
    )


def _open_database(settings: Settings, database_id: Optional[str], provider):
    """Connection plus catalog (persisted snapshot if present, else live)."""
    database_id = _pick_database(settings, database_id)
    if database_id not in settings.databases:
        raise click.ClickException(
            f"database {database_id!r} is not in the config file"
        )
    conn = catalog_mod.connect(settings.databases[database_id])
    if database_id in catalog_mod.list_catalogs(settings.state_dir):
        cat = catalog_mod.load(database_id, settings.state_dir)
    else:
        cat = catalog_mod.snapshot(conn, database_id)
    if not cat.embeddings:
        catalog_mod.attach_embeddings(cat, provider)
    return conn, cat


def _load_catalog(settings: Settings, database_id: Optional[str]):
    known = catalog_mod.list_catalogs(settings.state_dir)
    if database_id is None:
        if len(known) == 1:
            database_id = known[0]
        else:
            raise click.ClickException(
                "--db is required; synced catalogs: " + (", ".join(known) or "(none)")
            )
    if database_id not in known:
        raise click.ClickException(
            f"no synced catalog for {database_id!r}; run: orca catalog sync"
        )
    return catalog_mod.load(database_id, settings.state_dir)


@click.group(name="orca")
@click.option("--config", "-c", "config_path", type=click.Path(exists=True),
              default=None, help="TOML config file.")
@click.option("--state-dir", default=None, help="Override the state directory.")
@click.option("--mock-script", default=None,
              help="Scripted mock provider replies (forces provider kind to mock).")
@click.pass_context
def main(ctx, config_path, state_dir, mock_script):
    """Agentic data analysis over relational databases."""
    ctx.obj = load_settings(config_path, state_dir, mock_script)


# --- catalog ------------------------------------------------------------------


@main.group("catalog")
def catalog_group():
    """Maintain persisted schema snapshots."""


@catalog_group.command("sync")
@click.option("--db", "conn_string", required=True,
              help="sqlite path or sqlite:/// URL.")
@click.option("--id", "database_id", default=None,
              help="Catalog id (defaults to the file stem).")
@click.pass_obj
@friendly_errors
def catalog_sync(settings: Settings, conn_string: str, database_id: Optional[str]):
    """Snapshot schema, statistics, and metadata embeddings."""
    database_id = database_id or _default_database_id(conn_string)
    conn = catalog_mod.connect(conn_string)
    provider = build_provider(settings.provider)
    cat = catalog_mod.sync(conn, database_id, provider, settings.state_dir)
    path = Path(settings.state_dir) / "catalog" / f"{database_id}.catalog"
    click.echo(f"synced {database_id}: {len(cat.tables)} tables -> {path}")


@catalog_group.command("list")
@click.pass_obj
def catalog_list(settings: Settings):
    """List synced catalog ids."""
    for name in catalog_mod.list_catalogs(settings.state_dir):
        click.echo(name)


# --- explore / recommend ------------------------------------------------------


@main.command()
@click.argument("table")
@click.option("--db", "database_id", default=None)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]),
              default="text", show_default=True)
@click.pass_obj
@friendly_errors
def explore(settings: Settings, table: str, database_id: Optional[str], fmt: str):
    """Profile one table: description, anomalies, suggested analyses."""
    cat = _load_catalog(settings, database_id)
    provider = build_provider(settings.provider)
    overview = explore_table(table, cat, provider)
    if fmt == "json":
        click.echo(json.dumps(
            {
                "table": overview.table,
                "description": overview.description,
                "column_notes": overview.column_notes,
                "anomalies": [
                    {"column": a.column, "kind": a.kind, "evidence": a.evidence}
                    for a in overview.anomalies
                ],
                "related_tables": [t for t, _ in overview.related_tables],
                "suggested_analyses": overview.suggested_analyses,
            },
            indent=2,
        ))
        return
    click.echo(f"table: {overview.table}")
    click.echo(overview.description)
    if overview.anomalies:
        click.echo("anomalies:")
        for flag in overview.anomalies:
            click.echo(f"  - {flag.column}: {flag.kind} ({flag.evidence})")
    if overview.related_tables:
        click.echo("related: " + ", ".join(t for t, _ in overview.related_tables))
    for suggestion in overview.suggested_analyses:
        click.echo(f"  * {suggestion}")


@main.command()
@click.argument("question")
@click.option("--db", "database_id", default=None)
@click.option("--k", default=DEFAULT_K, show_default=True,
              help="Candidate pool size for the similarity search.")
@click.option("--erd-out", type=click.Path(), default=None,
              help="Write the relationship diagram (graph text) here.")
@click.pass_obj
@friendly_errors
def recommend(settings: Settings, question: str, database_id: Optional[str],
              k: int, erd_out: Optional[str]):
    """Pick the tables and key columns that fit an analytical objective."""
    cat = _load_catalog(settings, database_id)
    provider = build_provider(settings.provider)
    rec = recommend_tables(question, cat, provider, k=k)
    click.echo(f"objective: {rec.objective}")
    for table, reason in rec.tables:
        keys = ", ".join(rec.key_columns.get(table, []))
        click.echo(f"  {table} [{keys}] — {reason}")
    if erd_out:
        Path(erd_out).write_text(rec.erd_doc)
        click.echo(f"erd -> {erd_out}")


# --- sql ------------------------------------------------------------------


@main.command()
@click.argument("question")
@click.option("--db", "database_id", default=None)
@click.option("--max-attempts", default=MAX_ATTEMPTS_PER_ROUND, show_default=True,
              help="Execution budget per generation round (hard cap 3).")
@click.option("--trace-out", type=click.Path(), default=None,
              help="Write the stage log here, one line per event.")
@click.pass_obj
@friendly_errors
def sql(settings: Settings, question: str, database_id: Optional[str],
        max_attempts: int, trace_out: Optional[str]):
    """Answer a question by generating, executing, and validating SQL."""
    provider = build_provider(settings.provider)
    conn, cat = _open_database(settings, database_id, provider)
    trace = run_pipeline(question, cat, conn, provider, max_attempts=max_attempts)
    if trace_out:
        Path(trace_out).write_text(trace.to_jsonl())
        click.echo(f"trace -> {trace_out}")
    click.echo(f"status: {trace.status}")
    if trace.final_sql:
        click.echo(trace.final_sql)
    if trace.result_preview is not None:
        click.echo(" | ".join(trace.result_preview.columns))
        for row in trace.result_preview.rows:
            click.echo(" | ".join(str(v) for v in row))


# --- causal ---------------------------------------------------------------


def _parse_bindings(binds: tuple[str, ...]) -> dict[str, tuple[str, str]]:
    bindings: dict[str, tuple[str, str]] = {}
    for item in binds:
        var, sep, target = item.partition("=")
        table, dot, column = target.partition(".")
        if not sep or not dot or not var or not table or not column:
            raise click.ClickException(
                f"bad --bind {item!r}; expected var=table.column"
            )
        bindings[var.strip()] = (table.strip(), column.strip())
    return bindings


@main.command()
@click.argument("question", required=False, default=None)
@click.option("--treatment", required=True)
@click.option("--outcome", required=True)
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True),
              help="Edge-list file: one 'A -> B' per line; 'unobserved: U' lines.")
@click.option("--db", "database_id", default=None)
@click.option("--bind", "binds", multiple=True,
              help="var=table.column (repeat for every observed variable).")
@click.option("--sql", "injected_sql", default=None,
              help="Skip SQL generation and use this statement for retrieval.")
@click.option("--seed", default=0, show_default=True)
@click.option("--report-out", type=click.Path(), default=None,
              help="Write the structured report here.")
@click.pass_obj
@friendly_errors
def causal(settings: Settings, question: Optional[str], treatment: str,
           outcome: str, graph_path: str, database_id: Optional[str],
           binds: tuple[str, ...], injected_sql: Optional[str], seed: int,
           report_out: Optional[str]):
    """Estimate the causal effect of TREATMENT on OUTCOME."""
    provider = build_provider(settings.provider)
    conn, cat = _open_database(settings, database_id, provider)
    graph = parse_graph_text(Path(graph_path).read_text())
    query = CausalQuery(
        raw_text=question or f"What is the effect of {treatment} on {outcome}?",
        treatment=treatment,
        outcome=outcome,
        graph=graph,
        variable_bindings=_parse_bindings(binds),
    )
    report = analyze(
        query, cat, conn, provider, seed=seed, injected_sql=injected_sql
    )
    if report_out:
        Path(report_out).write_text(json.dumps(report_to_dict(report), indent=2))
        click.echo(f"report -> {report_out}")
    click.echo(f"status: {report.status}")
    for event in report.trace:
        rest = {k: v for k, v in event.items() if k != "stage"}
        click.echo(f"[{event['stage']}] {json.dumps(rest, default=str)}")
    if report.estimate is not None:
        est = report.estimate
        click.echo(
            f"ATE = {est.ate:.4f}  "
            f"[{est.ci_low:.4f}, {est.ci_high:.4f}]  (n={est.n_used}, {est.method})"
        )
    if report.interpretation:
        click.echo(report.interpretation)
    if report.error:
        click.echo(f"error: {report.error}")


# --- reef -------------------------------------------------------------------


def _parse_scale(scale: tuple[str, ...]) -> dict[str, float]:
    """--scale users=10000 gives a target row count; the generator wants a
    multiplier over its base size, so convert here."""
    out: dict[str, float] = {}
    for item in scale:
        name, sep, value = item.partition("=")
        if not sep:
            raise click.ClickException(f"bad --scale {item!r}; expected table=N")
        name = name.strip()
        count = float(value)
        base = BASE_SIZES.get(name)
        out[name] = count / base if base else count
    return out


@main.group("reef")
def reef_group():
    """Synthetic e-commerce environment with known causal ground truth."""


@reef_group.command("generate")
@click.option("--seed", default=0, show_default=True)
@click.option("--scale", multiple=True, help="Row-count override, e.g. users=10000.")
@click.option("--dgp-config", type=click.Path(exists=True), default=None,
              help="TOML file overriding generator coefficients.")
@click.option("--out", required=True,
              help="Target sqlite file, or a directory for db + manifest.")
@click.pass_obj
@friendly_errors
def reef_generate(settings: Settings, seed: int, scale: tuple[str, ...],
                  dgp_config: Optional[str], out: str):
    """Generate the database and its ground-truth manifest."""
    overrides: dict = {}
    if dgp_config:
        raw = tomllib.loads(Path(dgp_config).read_text())
        valid = {f.name for f in fields(DgpConfig)}
        for key, value in raw.items():
            if key not in valid:
                raise click.ClickException(f"unknown generator option {key!r}")
            overrides[key] = tuple(value) if isinstance(value, list) else value
    overrides.setdefault("scale", {}).update(_parse_scale(scale))
    config = DgpConfig(seed=seed, **overrides)

    out_path = Path(out)
    if out_path.is_dir() or not out_path.suffix:
        out_path.mkdir(parents=True, exist_ok=True)
        db_path = out_path / "reef.db"
        manifest_path = out_path / "manifest.json"
    else:
        db_path = out_path
        manifest_path = out_path.with_suffix(".manifest.json")

    database = generate(config)
    conn = sqlite3.connect(db_path)
    load_into(database, conn, force=True)
    conn.close()
    truth = compute_ground_truth(config, db=database)
    save_manifest(truth, manifest_path)
    rows = sum(len(t.rows) for t in database.tables.values())
    click.echo(
        f"generated {len(database.tables)} tables / {rows} rows -> {db_path}"
    )
    click.echo(f"ground truth ({len(truth.queries)} queries) -> {manifest_path}")


# --- eval ---------------------------------------------------------------------


@main.command("eval")
@click.option("--task", type=click.IntRange(1, 4), required=True)
@click.option("--fixtures", type=click.Path(exists=True), default=None)
@click.option("--report", "report_path", type=click.Path(), default=None)
@click.option("--mode", type=click.Choice(["oracle", "agentic"]),
              default="oracle", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--db", "database_id", default=None)
@click.pass_obj
@friendly_errors
def eval_command(settings: Settings, task: int, fixtures: Optional[str],
                 report_path: Optional[str], mode: str, seed: int,
                 database_id: Optional[str]):
    """Run one benchmark task and print its aggregate scores."""
    provider = build_provider(settings.provider)
    kwargs: dict = {"provider": provider, "judge": provider, "mode": mode,
                    "seed": seed}
    if task in (1, 2, 3):
        conn, cat = _open_database(settings, database_id, provider)
        kwargs["catalog"] = cat
        kwargs["connection"] = conn
    result = run_task(task, fixtures, **kwargs)
    if report_path:
        Path(report_path).write_text(json.dumps(result, indent=2))
        click.echo(f"report -> {report_path}")
    for key, value in result.items():
        if key == "rows":
            continue
        click.echo(f"{key}: {value}")


# --- service ------------------------------------------------------------------


def build_manager(settings: Settings) -> SessionManager:
    provider = build_provider(settings.provider)
    manager = SessionManager(settings.state_dir, provider)
    for database_id, conn_string in sorted(settings.databases.items()):
        conn = sqlite3.connect(
            _sqlite_path(conn_string), check_same_thread=False
        )
        manager.register_database(database_id, conn)
    return manager


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.pass_obj
@friendly_errors
def serve(settings: Settings, port: int, host: str):
    """Run the HTTP session service."""
    import uvicorn

    manager = build_manager(settings)
    click.echo(
        f"serving {sorted(manager.databases)} on http://{host}:{port} "
        f"(state: {settings.state_dir})"
    )
    uvicorn.run(create_app(manager), host=host, port=port)


@main.command()
@click.argument("question")
@click.option("--db", "database_id", default=None)
@click.pass_obj
@friendly_errors
def ask(settings: Settings, question: str, database_id: Optional[str]):
    """One-shot question through a fresh session; prints the event log."""
    manager = build_manager(settings)
    database_id = _pick_database(settings, database_id)
    session = manager.create_session(database_id)
    events = manager.submit_query(session.session_id, question)
    for event in events:
        click.echo(
            f"[{event.sequence:03d}] {event.stage}: "
            + json.dumps(event.payload, default=str)
        )
    if manager.get_session(session.session_id).pending is not None:
        click.echo("(awaiting clarification — answer via the service feedback API)")
