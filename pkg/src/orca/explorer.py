"""Single-table overview: description, anomaly screening, related tables.

Anomaly rules run locally on catalog statistics and are always included in
the result; the provider only adds prose on top. The model never sees raw
rows — only the statistics snapshot.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .catalog import ColumnStats, ForeignKeyEdge, SchemaCatalog, build_metadata_docs
from .errors import ParseFailure, UnknownTable
from .providers import ChatRequest, Provider

NULL_RATIO_THRESHOLD = 0.3
SKEWNESS_THRESHOLD = 2.0
SIGMA_MULTIPLIER = 4.0

FALLBACK_ANALYSES = [
    "aggregate per entity and compare segment averages",
    "trend analysis over the time-like columns",
    "cohort comparison between active and inactive groups",
]

_SYSTEM = """\
You are a careful data analyst. Given column statistics and foreign keys for
one table, produce a short description, a note per column, any anomalies you
see, and a few suggested analyses. Do not invent columns."""

_SCHEMA_HINT = (
    '{"description": "...", "column_notes": {"col": "..."}, '
    '"anomalies": [{"column": "...", "kind": "...", "evidence": "..."}], '
    '"suggested_analyses": ["..."]}'
)


@dataclass(frozen=True)
class AnomalyFlag:
    column: str
    kind: str  # high_null_ratio|skewed_distribution|potential_outliers|constant_column
    evidence: str


@dataclass
class TableOverview:
    table: str
    description: str
    column_notes: dict[str, str] = field(default_factory=dict)
    anomalies: list[AnomalyFlag] = field(default_factory=list)
    related_tables: list[tuple[str, ForeignKeyEdge]] = field(default_factory=list)
    suggested_analyses: list[str] = field(default_factory=list)


def compute_anomalies(stats: list[ColumnStats]) -> list[AnomalyFlag]:
    flags: list[AnomalyFlag] = []
    for col in stats:
        if col.null_ratio > NULL_RATIO_THRESHOLD:
            flags.append(
                AnomalyFlag(col.name, "high_null_ratio", f"null_ratio={col.null_ratio:.3f}")
            )
        if col.skewness is not None and abs(col.skewness) > SKEWNESS_THRESHOLD:
            flags.append(
                AnomalyFlag(col.name, "skewed_distribution", f"skewness={col.skewness:.2f}")
            )
        if col.mean is not None and col.median is not None:
            mx, mn = float(col.max), float(col.min)
            if mx > col.mean + 5 * (mx - col.median):
                flags.append(
                    AnomalyFlag(
                        col.name,
                        "potential_outliers",
                        f"max={mx:.4g} exceeds mean+5*(max-median)",
                    )
                )
            elif col.stddev is not None and (
                mx > col.mean + SIGMA_MULTIPLIER * col.stddev
                or mn < col.mean - SIGMA_MULTIPLIER * col.stddev
            ):
                flags.append(
                    AnomalyFlag(
                        col.name,
                        "potential_outliers",
                        f"extreme value beyond {SIGMA_MULTIPLIER:.0f} standard deviations",
                    )
                )
        if col.unique_count <= 1:
            flags.append(
                AnomalyFlag(col.name, "constant_column", f"unique_count={col.unique_count}")
            )
    return flags


def related_tables(
    table: str, catalog: SchemaCatalog
) -> list[tuple[str, ForeignKeyEdge]]:
    out = []
    for edge in catalog.edges_touching(table):
        other = edge.to_table if edge.from_table == table else edge.from_table
        if other != table:
            out.append((other, edge))
    return out


def _stats_block(table: str, catalog: SchemaCatalog) -> str:
    docs = build_metadata_docs(catalog)
    lines = [d.text for d in docs if d.table == table]
    return "\n".join(lines)


def _fk_block(table: str, catalog: SchemaCatalog) -> str:
    edges = catalog.edges_touching(table)
    if not edges:
        return "(no foreign keys)"
    return "\n".join(
        f"{e.from_table}.{e.from_column} -> {e.to_table}.{e.to_column}" for e in edges
    )


def explore(table: str, catalog: SchemaCatalog, provider: Provider) -> TableOverview:
    """Prompt from statistics only, merged with locally computed anomalies."""
    if table not in catalog.tables:
        raise UnknownTable(f"table {table!r} not in catalog {catalog.database_id!r}")
    info = catalog.tables[table]
    local_flags = compute_anomalies(info.columns)
    column_names = {c.name for c in info.columns}

    request = ChatRequest(
        system_text=_SYSTEM,
        user_text=f"Summarize table {table} for an analyst deciding what to do with it.",
        context_blocks=(
            ("column statistics", _stats_block(table, catalog)),
            ("foreign keys", _fk_block(table, catalog)),
        ),
        output_schema_hint=_SCHEMA_HINT,
    )
    description = ""
    column_notes: dict[str, str] = {}
    model_flags: list[AnomalyFlag] = []
    suggested: list[str] = []
    try:
        response = provider.chat(request)
        parsed = response.parsed if isinstance(response.parsed, dict) else {}
        description = str(parsed.get("description", "")).strip()
        for col, note in (parsed.get("column_notes") or {}).items():
            if col in column_names:
                column_notes[col] = str(note)
        for entry in parsed.get("anomalies") or []:
            if isinstance(entry, dict) and entry.get("column") in column_names:
                model_flags.append(
                    AnomalyFlag(
                        column=str(entry["column"]),
                        kind=str(entry.get("kind", "potential_outliers")),
                        evidence=str(entry.get("evidence", "reported by model")),
                    )
                )
        suggested = [str(s) for s in parsed.get("suggested_analyses") or []]
    except ParseFailure:
        pass

    if not description:
        description = _stats_block(table, catalog).splitlines()[0]
    if not suggested:
        suggested = list(FALLBACK_ANALYSES)

    # local flags are authoritative; model flags only add new (column, kind) pairs
    seen = {(f.column, f.kind) for f in local_flags}
    merged = list(local_flags)
    for flag in model_flags:
        if (flag.column, flag.kind) not in seen:
            seen.add((flag.column, flag.kind))
            merged.append(flag)

    return TableOverview(
        table=table,
        description=description,
        column_notes=column_notes,
        anomalies=merged,
        related_tables=related_tables(table, catalog),
        suggested_analyses=suggested,
    )
