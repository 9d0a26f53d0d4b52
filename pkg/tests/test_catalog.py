"""Catalog snapshot, metadata docs, and persistence round-trip."""

import sqlite3

import pytest

from orca import catalog
from orca.errors import ConnectionFailed, EmptyDatabase, UnknownDatabaseId
from orca.providers import MockProvider, MockScript


def fixture_db() -> sqlite3.Connection:
    conn = sqlite3.connect(":memory:")
    conn.executescript(
        """
        CREATE TABLE users (
            id INTEGER PRIMARY KEY,
            name TEXT,
            score REAL
        );
        CREATE TABLE orders (
            id INTEGER PRIMARY KEY,
            user_id INTEGER REFERENCES users,
            amount REAL,
            note TEXT,
            FOREIGN KEY (user_id) REFERENCES users(id)
        );
        """
    )
    users = [(1, "ann", 1.0), (2, "bob", 2.0), (3, "cid", 3.0), (4, None, 100.0)]
    conn.executemany("INSERT INTO users VALUES (?,?,?)", users)
    orders = [(1, 1, 10.0, None), (2, 1, 20.0, None), (3, 2, 30.0, None)]
    conn.executemany("INSERT INTO orders VALUES (?,?,?,?)", orders)
    conn.commit()
    return conn


class TestSnapshot:
    def test_tables_and_counts(self):
        cat = catalog.snapshot(fixture_db(), "shop")
        assert cat.table_names() == ["orders", "users"]
        assert cat.tables["users"].row_count == 4
        assert cat.tables["orders"].row_count == 3
        assert cat.tables["users"].primary_key == ["id"]

    def test_numeric_stats(self):
        cat = catalog.snapshot(fixture_db(), "shop")
        score = next(
            c for c in cat.tables["users"].columns if c.name == "score"
        )
        assert score.null_count == 0
        assert score.mean == pytest.approx(26.5)
        assert score.median == pytest.approx(2.5)
        assert score.min == 1.0 and score.max == 100.0
        assert score.skewness is not None and score.skewness > 1
        assert score.stddev is not None and score.stddev > 0
        assert score.unique_count == 4

    def test_string_stats_lexicographic(self):
        cat = catalog.snapshot(fixture_db(), "shop")
        name = next(c for c in cat.tables["users"].columns if c.name == "name")
        assert name.mean is None and name.median is None
        assert name.min == "ann" and name.max == "cid"
        assert name.null_count == 1
        assert name.null_ratio == pytest.approx(0.25)

    def test_all_null_column(self):
        cat = catalog.snapshot(fixture_db(), "shop")
        note = next(c for c in cat.tables["orders"].columns if c.name == "note")
        assert note.null_ratio == 1.0
        assert note.unique_count == 0
        assert note.min is None and note.max is None
        assert note.example_values == ()

    def test_constant_column_has_no_skewness(self):
        conn = sqlite3.connect(":memory:")
        conn.execute("CREATE TABLE t (x REAL)")
        conn.executemany("INSERT INTO t VALUES (?)", [(7.0,)] * 5)
        cat = catalog.snapshot(conn, "flat")
        col = cat.tables["t"].columns[0]
        assert col.skewness is None and col.stddev is None
        assert col.mean == 7.0

    def test_foreign_keys_resolved(self):
        cat = catalog.snapshot(fixture_db(), "shop")
        # both the explicit FK and the bare `REFERENCES users` resolve to users.id
        assert all(
            e.from_table == "orders" and e.to_table == "users" and e.to_column == "id"
            for e in cat.fk_edges
        )
        assert cat.edges_touching("users") == cat.fk_edges
        assert cat.edges_touching("orders") == cat.fk_edges

    def test_empty_database_rejected(self):
        with pytest.raises(EmptyDatabase):
            catalog.snapshot(sqlite3.connect(":memory:"), "void")

    def test_missing_file_rejected(self):
        with pytest.raises(ConnectionFailed):
            catalog.connect("/nonexistent/nope.db")

    def test_example_values_distinct_and_capped(self):
        conn = sqlite3.connect(":memory:")
        conn.execute("CREATE TABLE t (x INTEGER)")
        conn.executemany("INSERT INTO t VALUES (?)", [(i % 3,) for i in range(20)])
        cat = catalog.snapshot(conn, "caps")
        col = cat.tables["t"].columns[0]
        assert len(col.example_values) == 3
        assert len(set(col.example_values)) == 3


class TestMetadataDocs:
    def test_one_doc_per_table_and_column(self):
        cat = catalog.snapshot(fixture_db(), "shop")
        docs = catalog.build_metadata_docs(cat)
        table_docs = [d for d in docs if d.kind == "table"]
        column_docs = [d for d in docs if d.kind == "column"]
        assert [d.table for d in table_docs] == ["orders", "users"]
        n_columns = sum(len(t.columns) for t in cat.tables.values())
        assert len(column_docs) == n_columns
        assert len({d.doc_id for d in docs}) == len(docs)

    def test_doc_text_mentions_schema(self):
        cat = catalog.snapshot(fixture_db(), "shop")
        docs = {d.doc_id: d for d in catalog.build_metadata_docs(cat)}
        users = docs["table:users"]
        assert "users" in users.text and "score" in users.text
        assert "Primary key: id" in users.text
        orders = docs["table:orders"]
        assert "references users.id" in orders.text
        score = docs["column:users.score"]
        assert "mean" in score.text and "examples" in score.text

    def test_docs_are_deterministic(self):
        cat = catalog.snapshot(fixture_db(), "shop")
        assert catalog.build_metadata_docs(cat) == catalog.build_metadata_docs(cat)


class TestPersistence:
    def test_round_trip(self, tmp_path):
        cat = catalog.snapshot(fixture_db(), "shop")
        provider = MockProvider(MockScript(entries=(), embedding_seed=5))
        catalog.attach_embeddings(cat, provider)
        catalog.persist(cat, tmp_path)
        loaded = catalog.load("shop", tmp_path)
        assert loaded == cat
        assert (tmp_path / "catalog" / "shop.catalog").exists()

    def test_unknown_id(self, tmp_path):
        with pytest.raises(UnknownDatabaseId):
            catalog.load("ghost", tmp_path)

    def test_sync_and_list(self, tmp_path):
        provider = MockProvider(MockScript(entries=(), embedding_seed=5))
        cat = catalog.sync(fixture_db(), "shop", provider, tmp_path)
        assert catalog.list_catalogs(tmp_path) == ["shop"]
        assert cat.embeddings
        vec = next(iter(cat.embeddings.values()))
        assert len(vec.values) == 64

    def test_embeddings_cover_every_doc(self, tmp_path):
        cat = catalog.snapshot(fixture_db(), "shop")
        provider = MockProvider(MockScript(entries=(), embedding_seed=5))
        catalog.attach_embeddings(cat, provider)
        docs = catalog.build_metadata_docs(cat)
        assert set(cat.embeddings) == {d.doc_id for d in docs}


class TestSummary:
    def test_summary_lists_tables(self):
        cat = catalog.snapshot(fixture_db(), "shop")
        text = cat.summary_text()
        assert text.splitlines()[0].startswith("orders (3 rows):")
        assert "users (4 rows)" in text
