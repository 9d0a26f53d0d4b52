"""Embedding candidate search, selection parsing, fk-closure, ERD text."""

import json
import sqlite3

import pytest

from orca import catalog
from orca.errors import EmbeddingsMissing, UnknownTable
from orca.providers import EmbeddingVector, MockProvider, MockScript
from orca.recommender import (
    candidate_search,
    extract_objective,
    fk_closure,
    recommend,
    render_erd,
)


def fixture_catalog(with_embeddings=True):
    conn = sqlite3.connect(":memory:")
    conn.executescript(
        """
        CREATE TABLE users (id INTEGER PRIMARY KEY, name TEXT);
        CREATE TABLE orders (
            id INTEGER PRIMARY KEY, user_id INTEGER, amount REAL,
            FOREIGN KEY (user_id) REFERENCES users(id)
        );
        CREATE TABLE payments (
            id INTEGER PRIMARY KEY, order_id INTEGER, paid REAL,
            FOREIGN KEY (order_id) REFERENCES orders(id)
        );
        """
    )
    conn.executemany("INSERT INTO users VALUES (?,?)", [(1, "a"), (2, "b")])
    conn.executemany("INSERT INTO orders VALUES (?,?,?)", [(1, 1, 5.0), (2, 2, 6.0)])
    conn.executemany("INSERT INTO payments VALUES (?,?,?)", [(1, 1, 5.0)])
    cat = catalog.snapshot(conn, "shop")
    if with_embeddings:
        provider = MockProvider(MockScript(entries=(), embedding_seed=3))
        catalog.attach_embeddings(cat, provider)
    return cat


def scripted(*responses, seed=3):
    return MockProvider(
        MockScript(entries=tuple(("*", r) for r in responses), embedding_seed=seed)
    )


class TestObjective:
    def test_scripted_summary(self):
        provider = scripted(json.dumps({"objective": "Analyze churn by cohort."}))
        assert extract_objective("long rambling text", provider) == (
            "Analyze churn by cohort."
        )

    def test_fallback_truncates(self):
        text = "x" * 10_000
        provider = scripted("bad", "bad again")
        assert extract_objective(text, provider) == "x" * 512


class TestCandidateSearch:
    def test_identical_text_ranks_first(self):
        cat = fixture_catalog()
        docs = catalog.build_metadata_docs(cat)
        users_doc = next(d for d in docs if d.doc_id == "table:users")
        result = candidate_search(users_doc.text, cat, scripted(), k=5)
        assert result[0].doc_id == "table:users"

    def test_k_larger_than_corpus(self):
        cat = fixture_catalog()
        result = candidate_search("anything", cat, scripted(), k=999)
        assert len(result) == len(cat.embeddings)

    def test_ties_break_by_doc_id(self):
        cat = fixture_catalog()
        shared = cat.embeddings[next(iter(sorted(cat.embeddings)))]
        cat.embeddings = {doc_id: shared for doc_id in cat.embeddings}
        result = candidate_search("q", cat, scripted(), k=4)
        ids = [d.doc_id for d in result]
        assert ids == sorted(ids)

    def test_scale_invariance(self):
        cat = fixture_catalog()
        before = [d.doc_id for d in candidate_search("orders by user", cat, scripted(), k=6)]
        cat.embeddings = {
            doc_id: EmbeddingVector(
                values=tuple(3.7 * v for v in vec.values), model_id=vec.model_id
            )
            for doc_id, vec in cat.embeddings.items()
        }
        after = [d.doc_id for d in candidate_search("orders by user", cat, scripted(), k=6)]
        assert before == after

    def test_missing_embeddings(self):
        cat = fixture_catalog(with_embeddings=False)
        with pytest.raises(EmbeddingsMissing):
            candidate_search("q", cat, scripted(), k=5)


class TestFkClosure:
    def test_bridge_added(self):
        cat = fixture_catalog()
        assert fk_closure(cat, ["payments", "users"]) == ["orders"]

    def test_direct_edge_needs_no_bridge(self):
        cat = fixture_catalog()
        assert fk_closure(cat, ["orders", "users"]) == []


class TestRenderErd:
    def test_counts_and_label(self):
        cat = fixture_catalog()
        erd = render_erd(["orders", "users"], cat)
        assert erd.count(" -> ") == 1
        assert '"orders" -> "users" [label="user_id→id"]' in erd
        assert erd.splitlines()[1].startswith('  "orders"')  # nodes sorted

    def test_deterministic(self):
        cat = fixture_catalog()
        assert render_erd(["users", "orders"], cat) == render_erd(
            ["orders", "users"], cat
        )

    def test_isolated_node(self):
        cat = fixture_catalog()
        erd = render_erd(["users"], cat)
        assert " -> " not in erd

    def test_unknown_table(self):
        with pytest.raises(UnknownTable):
            render_erd(["ghost"], fixture_catalog())


class TestRecommend:
    def selection_reply(self):
        return json.dumps(
            {
                "tables": [
                    {"table": "orders", "reason": "has amounts"},
                    {"table": "users", "reason": "has identities"},
                    {"table": "bogus", "reason": "should be dropped"},
                ],
                "key_columns": {"orders": ["user_id", "nope"], "bogus": ["x"]},
            }
        )

    def test_full_pipeline(self):
        cat = fixture_catalog()
        provider = scripted(
            json.dumps({"objective": "orders per user"}), self.selection_reply()
        )
        rec = recommend("how many orders per user?", cat, provider)
        names = [t for t, _ in rec.tables]
        assert names == ["orders", "users"]
        assert rec.key_columns["orders"] == ["user_id"]  # filtered to real columns
        assert "users" in rec.key_columns  # defaulted
        assert 'label="user_id→id"' in rec.erd_doc
        assert rec.objective == "orders per user"
        assert len(rec.candidate_pool) <= 20

    def test_bridge_table_added(self):
        cat = fixture_catalog()
        reply = json.dumps(
            {"tables": [{"table": "payments", "reason": "r"},
                        {"table": "users", "reason": "r"}]}
        )
        provider = scripted(json.dumps({"objective": "o"}), reply)
        rec = recommend("q", cat, provider)
        assert ("orders", "join bridge") in rec.tables

    def test_selection_fallback_top_tables(self):
        cat = fixture_catalog()
        provider = scripted(
            json.dumps({"objective": "orders and payments"}), "bad", "bad again"
        )
        rec = recommend("q", cat, provider)
        assert rec.tables
        assert all(reason == "top candidate match" for _, reason in rec.tables
                   if reason != "join bridge")
        assert len([t for t in rec.tables if t[1] == "top candidate match"]) <= 3
