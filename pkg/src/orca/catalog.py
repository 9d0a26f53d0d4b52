"""Database metadata snapshot: tables, column statistics, foreign keys, and
embeddings of metadata docs.

The catalog is captured once per database and then shared read-only by every
other module; nothing here ever writes to the source database.
"""

from __future__ import annotations

import json
import math
import random
import sqlite3
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional

from .errors import (
    ConnectionFailed,
    EmptyDatabase,
    StateDirUnwritable,
    UnknownDatabaseId,
)
from .providers import EmbeddingVector, Provider

SCAN_CAP = 1_000_000
EXAMPLE_VALUES = 5


@dataclass(frozen=True)
class ColumnStats:
    """Per-column statistics over the scanned rows.

    ``row_count`` is the number of rows the statistics describe; it equals
    the table row count unless the scan was sampled down to ``SCAN_CAP``.
    """

    name: str
    declared_type: str
    null_count: int
    row_count: int
    null_ratio: float
    unique_count: int
    mean: Optional[float] = None
    median: Optional[float] = None
    min: Optional[object] = None
    max: Optional[object] = None
    skewness: Optional[float] = None
    stddev: Optional[float] = None
    example_values: tuple = ()


@dataclass(frozen=True)
class ForeignKeyEdge:
    from_table: str
    from_column: str
    to_table: str
    to_column: str


@dataclass
class TableInfo:
    columns: list[ColumnStats]
    primary_key: list[str]
    row_count: int


@dataclass
class SchemaCatalog:
    database_id: str
    tables: dict[str, TableInfo]
    fk_edges: list[ForeignKeyEdge]
    embeddings: dict[str, EmbeddingVector] = field(default_factory=dict)
    captured_at: str = ""

    def table_names(self) -> list[str]:
        return sorted(self.tables)

    def edges_touching(self, table: str) -> list[ForeignKeyEdge]:
        return [
            e for e in self.fk_edges if e.from_table == table or e.to_table == table
        ]

    def summary_text(self) -> str:
        parts = []
        for name in self.table_names():
            info = self.tables[name]
            cols = ", ".join(c.name for c in info.columns)
            parts.append(f"{name} ({info.row_count} rows): {cols}")
        return "\n".join(parts)


@dataclass(frozen=True)
class MetadataDoc:
    doc_id: str
    kind: str  # table | column
    table: str
    text: str
    column: Optional[str] = None


def connect(conn_string: str) -> sqlite3.Connection:
    """Open a sqlite connection from a path or sqlite:/// URL."""
    path = conn_string
    if path.startswith("sqlite:///"):
        path = path[len("sqlite:///"):]
    try:
        if path != ":memory:" and not Path(path).exists():
            raise ConnectionFailed(f"database file does not exist: {path}")
        conn = sqlite3.connect(path)
        conn.execute("SELECT 1")
        return conn
    except sqlite3.Error as exc:
        raise ConnectionFailed(str(exc)) from exc


def _scan_column(conn, table: str, column: str, row_count: int) -> list:
    if row_count <= SCAN_CAP:
        cursor = conn.execute(f'SELECT "{column}" FROM "{table}"')
        return [row[0] for row in cursor]
    # Reservoir sample: bounded memory, deterministic for a fixed schema.
    rng = random.Random(f"{table}.{column}")
    reservoir: list = []
    for i, row in enumerate(conn.execute(f'SELECT "{column}" FROM "{table}"')):
        if i < SCAN_CAP:
            reservoir.append(row[0])
        else:
            j = rng.randrange(i + 1)
            if j < SCAN_CAP:
                reservoir[j] = row[0]
    return reservoir


def _column_stats(name: str, declared: str, values: list) -> ColumnStats:
    scanned = len(values)
    non_null = [v for v in values if v is not None]
    null_count = scanned - len(non_null)
    null_ratio = null_count / max(scanned, 1)
    unique_count = len(set(non_null))

    examples: list = []
    seen = set()
    for v in non_null:
        key = repr(v)
        if key not in seen:
            seen.add(key)
            examples.append(v)
        if len(examples) == EXAMPLE_VALUES:
            break

    # sqlite stores values dynamically, so trust the values over the declared type
    numeric = bool(non_null) and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in non_null
    )
    mean = median = skewness = stddev = None
    lo = hi = None
    if numeric:
        data = sorted(float(v) for v in non_null)
        n = len(data)
        lo, hi = data[0], data[-1]
        mean = sum(data) / n
        mid = n // 2
        median = data[mid] if n % 2 else (data[mid - 1] + data[mid]) / 2.0
        m2 = sum((v - mean) ** 2 for v in data) / n
        if m2 > 0:
            stddev = math.sqrt(m2)
            m3 = sum((v - mean) ** 3 for v in data) / n
            skewness = m3 / m2 ** 1.5
    elif non_null:
        as_text = sorted(str(v) for v in non_null)
        lo, hi = as_text[0], as_text[-1]

    return ColumnStats(
        name=name,
        declared_type=declared,
        null_count=null_count,
        row_count=scanned,
        null_ratio=null_ratio,
        unique_count=unique_count,
        mean=mean,
        median=median,
        min=lo,
        max=hi,
        skewness=skewness,
        stddev=stddev,
        example_values=tuple(examples),
    )


def snapshot(conn: sqlite3.Connection, database_id: str) -> SchemaCatalog:
    """Introspect every user table and compute per-column statistics."""
    try:
        names = [
            row[0]
            for row in conn.execute(
                "SELECT name FROM sqlite_master WHERE type='table' "
                "AND name NOT LIKE 'sqlite_%' ORDER BY name"
            )
        ]
    except sqlite3.Error as exc:
        raise ConnectionFailed(str(exc)) from exc
    if not names:
        raise EmptyDatabase(f"database {database_id!r} has no user tables")

    tables: dict[str, TableInfo] = {}
    fk_edges: list[ForeignKeyEdge] = []
    for table in names:
        info_rows = list(conn.execute(f'PRAGMA table_info("{table}")'))
        row_count = conn.execute(f'SELECT COUNT(*) FROM "{table}"').fetchone()[0]
        primary_key = [
            r[1] for r in sorted((r for r in info_rows if r[5] > 0), key=lambda r: r[5])
        ]
        columns = []
        for _, col_name, declared, _notnull, _default, _pk in info_rows:
            values = _scan_column(conn, table, col_name, row_count)
            columns.append(_column_stats(col_name, declared or "", values))
        tables[table] = TableInfo(
            columns=columns, primary_key=primary_key, row_count=row_count
        )
        for fk in conn.execute(f'PRAGMA foreign_key_list("{table}")'):
            _, _, to_table, from_col, to_col = fk[0], fk[1], fk[2], fk[3], fk[4]
            if to_col is None:
                target_info = list(conn.execute(f'PRAGMA table_info("{to_table}")'))
                pk_cols = [r[1] for r in target_info if r[5] > 0]
                to_col = pk_cols[0] if pk_cols else target_info[0][1]
            fk_edges.append(
                ForeignKeyEdge(
                    from_table=table,
                    from_column=from_col,
                    to_table=to_table,
                    to_column=to_col,
                )
            )
    fk_edges = [e for e in fk_edges if e.to_table in tables]
    fk_edges.sort(key=lambda e: (e.from_table, e.from_column, e.to_table, e.to_column))
    return SchemaCatalog(
        database_id=database_id,
        tables=tables,
        fk_edges=fk_edges,
        captured_at=datetime.now(timezone.utc).isoformat(),
    )


def build_metadata_docs(catalog: SchemaCatalog) -> list[MetadataDoc]:
    """One doc per table plus one per column, in a stable order."""
    docs: list[MetadataDoc] = []
    for table in catalog.table_names():
        info = catalog.tables[table]
        col_bits = ", ".join(f"{c.name} ({c.declared_type})" for c in info.columns)
        fk_bits = "; ".join(
            f"{e.from_column} references {e.to_table}.{e.to_column}"
            for e in catalog.fk_edges
            if e.from_table == table
        )
        text = f"Table {table} with {info.row_count} rows. Columns: {col_bits}."
        if info.primary_key:
            text += f" Primary key: {', '.join(info.primary_key)}."
        if fk_bits:
            text += f" Foreign keys: {fk_bits}."
        docs.append(
            MetadataDoc(doc_id=f"table:{table}", kind="table", table=table, text=text)
        )
        for stats in info.columns:
            bits = [
                f"Column {stats.name} of table {table}",
                f"type {stats.declared_type or 'untyped'}",
                f"null ratio {stats.null_ratio:.3f}",
                f"{stats.unique_count} distinct values",
            ]
            if stats.mean is not None:
                bits.append(f"mean {stats.mean:.4g} median {stats.median:.4g}")
            if stats.min is not None:
                bits.append(f"range {stats.min!r} to {stats.max!r}")
            if stats.example_values:
                shown = ", ".join(repr(v) for v in stats.example_values)
                bits.append(f"examples: {shown}")
            docs.append(
                MetadataDoc(
                    doc_id=f"column:{table}.{stats.name}",
                    kind="column",
                    table=table,
                    column=stats.name,
                    text="; ".join(bits),
                )
            )
    return docs


def attach_embeddings(catalog: SchemaCatalog, provider: Provider) -> None:
    docs = build_metadata_docs(catalog)
    vectors = provider.embed([d.text for d in docs])
    catalog.embeddings = {d.doc_id: v for d, v in zip(docs, vectors)}


# --- persistence ----------------------------------------------------------------


def _catalog_path(state_dir: str | Path, database_id: str) -> Path:
    return Path(state_dir) / "catalog" / f"{database_id}.catalog"


def persist(catalog: SchemaCatalog, state_dir: str | Path) -> Path:
    catalog.captured_at = datetime.now(timezone.utc).isoformat()
    path = _catalog_path(state_dir, catalog.database_id)
    payload = {
        "version": 1,
        "database_id": catalog.database_id,
        "captured_at": catalog.captured_at,
        "tables": {
            name: {
                "columns": [asdict(c) for c in info.columns],
                "primary_key": info.primary_key,
                "row_count": info.row_count,
            }
            for name, info in catalog.tables.items()
        },
        "fk_edges": [asdict(e) for e in catalog.fk_edges],
        "embeddings": {
            doc_id: {"values": list(v.values), "model_id": v.model_id}
            for doc_id, v in catalog.embeddings.items()
        },
    }
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, sort_keys=True))
    except OSError as exc:
        raise StateDirUnwritable(str(exc)) from exc
    return path


def load(database_id: str, state_dir: str | Path) -> SchemaCatalog:
    path = _catalog_path(state_dir, database_id)
    if not path.exists():
        raise UnknownDatabaseId(f"no catalog for database id {database_id!r}")
    payload = json.loads(path.read_text())
    tables = {
        name: TableInfo(
            columns=[
                ColumnStats(**{**c, "example_values": tuple(c["example_values"])})
                for c in entry["columns"]
            ],
            primary_key=list(entry["primary_key"]),
            row_count=entry["row_count"],
        )
        for name, entry in payload["tables"].items()
    }
    return SchemaCatalog(
        database_id=payload["database_id"],
        tables=tables,
        fk_edges=[ForeignKeyEdge(**e) for e in payload["fk_edges"]],
        embeddings={
            doc_id: EmbeddingVector(values=tuple(v["values"]), model_id=v["model_id"])
            for doc_id, v in payload["embeddings"].items()
        },
        captured_at=payload["captured_at"],
    )


def sync(
    conn: sqlite3.Connection,
    database_id: str,
    provider: Provider,
    state_dir: str | Path,
) -> SchemaCatalog:
    """snapshot + metadata embeddings + persist, as one step."""
    catalog = snapshot(conn, database_id)
    attach_embeddings(catalog, provider)
    persist(catalog, state_dir)
    return catalog


def list_catalogs(state_dir: str | Path) -> list[str]:
    root = Path(state_dir) / "catalog"
    if not root.exists():
        return []
    return sorted(p.stem for p in root.glob("*.catalog"))
