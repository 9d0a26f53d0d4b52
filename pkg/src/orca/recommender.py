"""Objective-driven table recommendation over the metadata embedding index."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .catalog import MetadataDoc, SchemaCatalog, build_metadata_docs
from .errors import EmbeddingsMissing, NoTablesSelected, ParseFailure, UnknownTable
from .providers import ChatRequest, Provider, cosine

DEFAULT_K = 20
OBJECTIVE_FALLBACK_CHARS = 512
FALLBACK_TABLES = 3

_OBJECTIVE_SYSTEM = """\
Extract the underlying analytical objective from the user's text as one
sentence. Keep concrete variable and entity names."""

_SELECT_SYSTEM = """\
You select database tables for an analysis. From the candidate tables and
columns below, pick the tables (with a one-line reason each) and the key
columns per table that best serve the objective. Only use table and column
names that appear in the candidates or foreign keys."""

_SELECT_HINT = (
    '{"tables": [{"table": "...", "reason": "..."}], '
    '"key_columns": {"table": ["col", "..."]}}'
)


@dataclass
class Recommendation:
    objective: str
    tables: list[tuple[str, str]]  # (table, reason)
    key_columns: dict[str, list[str]] = field(default_factory=dict)
    erd_doc: str = ""
    candidate_pool: list[str] = field(default_factory=list)


def extract_objective(text: str, provider: Provider) -> str:
    request = ChatRequest(
        system_text=_OBJECTIVE_SYSTEM,
        user_text=text,
        output_schema_hint='{"objective": "..."}',
    )
    try:
        response = provider.chat(request)
        if isinstance(response.parsed, dict):
            objective = str(response.parsed.get("objective", "")).strip()
            if objective:
                return objective
    except ParseFailure:
        pass
    return text[:OBJECTIVE_FALLBACK_CHARS]


def candidate_search(
    objective: str,
    catalog: SchemaCatalog,
    provider: Provider,
    k: int = DEFAULT_K,
) -> list[MetadataDoc]:
    """Top-k metadata docs by cosine similarity; ties break on doc_id."""
    if not catalog.embeddings:
        raise EmbeddingsMissing(
            f"catalog {catalog.database_id!r} has no embeddings; run a sync first"
        )
    docs = [d for d in build_metadata_docs(catalog) if d.doc_id in catalog.embeddings]
    query_vec = provider.embed([objective])[0]
    scored = [
        (-cosine(query_vec.values, catalog.embeddings[d.doc_id].values), d.doc_id, d)
        for d in docs
    ]
    scored.sort(key=lambda item: (item[0], item[1]))
    return [d for _, _, d in scored[:k]]


def _direct_edge(catalog: SchemaCatalog, a: str, b: str) -> bool:
    return any(
        {e.from_table, e.to_table} == {a, b} for e in catalog.fk_edges
    )


def _neighbors(catalog: SchemaCatalog, table: str) -> set[str]:
    out = set()
    for e in catalog.edges_touching(table):
        out.add(e.to_table if e.from_table == table else e.from_table)
    out.discard(table)
    return out


def fk_closure(catalog: SchemaCatalog, selected: list[str]) -> list[str]:
    """Tables one hop from two selected tables that lack a direct edge."""
    bridges = set()
    for a, b in combinations(sorted(set(selected)), 2):
        if _direct_edge(catalog, a, b):
            continue
        common = _neighbors(catalog, a) & _neighbors(catalog, b)
        bridges |= common - set(selected)
    return sorted(bridges)


def default_key_columns(catalog: SchemaCatalog, table: str) -> list[str]:
    info = catalog.tables[table]
    wanted = set(info.primary_key)
    for e in catalog.fk_edges:
        if e.from_table == table:
            wanted.add(e.from_column)
    return [c.name for c in info.columns if c.name in wanted]


def render_erd(tables: list[str], catalog: SchemaCatalog) -> str:
    """Deterministic DOT text: sorted nodes with key columns, sorted fk edges."""
    for table in tables:
        if table not in catalog.tables:
            raise UnknownTable(f"table {table!r} not in catalog")
    selected = sorted(set(tables))
    lines = ["digraph erd {"]
    for table in selected:
        cols = ", ".join(default_key_columns(catalog, table))
        lines.append(f'  "{table}" [label="{table}: {cols}"];')
    for e in catalog.fk_edges:
        if e.from_table in selected and e.to_table in selected:
            lines.append(
                f'  "{e.from_table}" -> "{e.to_table}" '
                f'[label="{e.from_column}→{e.to_column}"];'
            )
    lines.append("}")
    return "\n".join(lines)


def _render_candidates(docs: list[MetadataDoc]) -> str:
    return "\n".join(f"{d.doc_id}: {d.text}" for d in docs)


def _render_fk(catalog: SchemaCatalog) -> str:
    if not catalog.fk_edges:
        return "(no foreign keys)"
    return "\n".join(
        f"{e.from_table}.{e.from_column} -> {e.to_table}.{e.to_column}"
        for e in catalog.fk_edges
    )


def recommend(
    query: str,
    catalog: SchemaCatalog,
    provider: Provider,
    k: int = DEFAULT_K,
) -> Recommendation:
    objective = extract_objective(query, provider)
    candidates = candidate_search(objective, catalog, provider, k=k)

    request = ChatRequest(
        system_text=_SELECT_SYSTEM,
        user_text=f"Objective: {objective}",
        context_blocks=(
            ("candidate tables and columns", _render_candidates(candidates)),
            ("foreign keys", _render_fk(catalog)),
        ),
        output_schema_hint=_SELECT_HINT,
    )
    tables: list[tuple[str, str]] = []
    key_columns: dict[str, list[str]] = {}
    try:
        response = provider.chat(request)
        parsed = response.parsed if isinstance(response.parsed, dict) else {}
        seen = set()
        for entry in parsed.get("tables") or []:
            if not isinstance(entry, dict):
                continue
            name = entry.get("table")
            if name in catalog.tables and name not in seen:
                seen.add(name)
                tables.append((name, str(entry.get("reason", "selected by model"))))
        for name, cols in (parsed.get("key_columns") or {}).items():
            if name not in catalog.tables:
                continue
            actual = {c.name for c in catalog.tables[name].columns}
            kept = [c for c in cols if c in actual]
            if kept:
                key_columns[name] = kept
    except ParseFailure:
        pass

    if not tables:
        # fallback: top distinct tables straight from the candidate ranking
        seen = set()
        for doc in candidates:
            if doc.table not in seen:
                seen.add(doc.table)
                tables.append((doc.table, "top candidate match"))
            if len(tables) == FALLBACK_TABLES:
                break
    if not tables:
        raise NoTablesSelected("no tables selected and candidate fallback is empty")

    selected_names = [t for t, _ in tables]
    for bridge in fk_closure(catalog, selected_names):
        tables.append((bridge, "join bridge"))
        selected_names.append(bridge)
    for name in selected_names:
        key_columns.setdefault(name, default_key_columns(catalog, name))

    return Recommendation(
        objective=objective,
        tables=tables,
        key_columns=key_columns,
        erd_doc=render_erd(selected_names, catalog),
        candidate_pool=[d.doc_id for d in candidates],
    )
