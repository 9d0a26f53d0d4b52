"""Metric exactness, result-equality semantics, fixtures, and task drivers."""

import json
import sqlite3

import pytest
from hypothesis import given
from hypothesis import strategies as st

from orca import catalog
from orca.errors import EmptyExampleSet, FixtureMissing, GoldSqlFails, JudgeUnavailable
from orca.evaluation import (
    CausalEvalRecord,
    RetrievalExample,
    SqlExample,
    causal_metrics,
    execution_accuracy,
    judge_description,
    load_retrieval_fixtures,
    load_sql_fixtures,
    recall_precision,
    run_task,
    sql_example_matches,
)
from orca.providers import MockProvider, MockScript
from orca.reef import DgpConfig, compute_ground_truth, save_manifest


def scripted(*responses):
    return MockProvider(
        MockScript(entries=tuple(("*", r) for r in responses), embedding_seed=1)
    )


def rex(gold, got, question="q"):
    return RetrievalExample(
        question=question,
        ground_truth_tables=frozenset(gold),
        recommended_tables=frozenset(got),
    )


class TestRecallPrecision:
    def test_identity(self):
        scores = recall_precision([rex({"a", "b"}, {"a", "b"})])
        assert scores.recall == 1.0
        assert scores.precision == 1.0

    def test_half_overlap(self):
        scores = recall_precision([rex({"a", "b"}, {"a", "c"})])
        assert scores.recall == 0.5
        assert scores.precision == 0.5

    def test_averaging(self):
        scores = recall_precision(
            [rex({"a"}, {"a"}), rex({"a", "b"}, {"a", "c", "d"})]
        )
        assert abs(scores.recall - 0.75) < 1e-12
        assert abs(scores.precision - (1.0 + 1.0 / 3.0) / 2.0) < 1e-12

    def test_empty_recommendation_flagged(self):
        scores = recall_precision([rex({"a"}, set(), question="nothing found")])
        assert scores.precision == 0.0
        assert scores.recall == 0.0
        assert scores.flagged_empty == ("nothing found",)

    def test_empty_gold_rejected(self):
        with pytest.raises(ValueError):
            rex(set(), {"a"})

    def test_empty_example_set(self):
        with pytest.raises(EmptyExampleSet):
            recall_precision([])

    @given(
        st.lists(
            st.tuples(
                st.sets(st.sampled_from("abcdef"), min_size=1, max_size=4),
                st.sets(st.sampled_from("abcdef"), max_size=4),
            ),
            min_size=1,
            max_size=8,
        ),
        st.randoms(),
    )
    def test_permutation_invariant(self, pairs, rand):
        examples = [rex(g, r, question=str(i)) for i, (g, r) in enumerate(pairs)]
        shuffled = examples[:]
        rand.shuffle(shuffled)
        a = recall_precision(examples)
        b = recall_precision(shuffled)
        assert abs(a.recall - b.recall) < 1e-12
        assert abs(a.precision - b.precision) < 1e-12


@pytest.fixture()
def db():
    conn = sqlite3.connect(":memory:")
    conn.executescript(
        """
        CREATE TABLE t (a INTEGER, b TEXT);
        INSERT INTO t VALUES (1, 'x'), (2, 'y'), (3, NULL);
        """
    )
    yield conn
    conn.close()


def sqlex(gold, pred, question="q"):
    return SqlExample(question=question, gold_sql=gold, predicted_sql=pred)


class TestExecutionAccuracy:
    def test_identical(self, db):
        assert sql_example_matches(sqlex("SELECT a FROM t", "SELECT a FROM t"), db)

    def test_row_order_ignored_without_order_by(self, db):
        assert sql_example_matches(
            sqlex("SELECT a FROM t", "SELECT a FROM t ORDER BY a DESC"), db
        )

    def test_order_by_in_gold_requires_sequence(self, db):
        assert not sql_example_matches(
            sqlex("SELECT a FROM t ORDER BY a", "SELECT a FROM t ORDER BY a DESC"), db
        )
        assert sql_example_matches(
            sqlex("SELECT a FROM t ORDER BY a", "SELECT a FROM t ORDER BY a ASC"), db
        )

    def test_subquery_order_by_is_not_top_level(self, db):
        gold = "SELECT a FROM (SELECT a FROM t ORDER BY a DESC)"
        pred = "SELECT a FROM t"
        assert sql_example_matches(sqlex(gold, pred), db)

    def test_order_by_inside_string_literal_ignored(self, db):
        gold = "SELECT 'ORDER BY a' AS a FROM t"
        pred = "SELECT 'ORDER BY a' AS a FROM t LIMIT 3"
        assert sql_example_matches(sqlex(gold, pred), db)

    def test_column_order_normalized_by_name(self, db):
        assert sql_example_matches(
            sqlex("SELECT a, b FROM t", "SELECT b, a FROM t"), db
        )

    def test_different_columns_unequal(self, db):
        assert not sql_example_matches(
            sqlex("SELECT a FROM t", "SELECT b FROM t"), db
        )

    def test_null_equals_null(self, db):
        assert sql_example_matches(
            sqlex("SELECT b FROM t WHERE a = 3", "SELECT b FROM t WHERE a > 2"), db
        )

    def test_multiset_semantics_counts_duplicates(self, db):
        db.execute("INSERT INTO t VALUES (1, 'x')")
        assert not sql_example_matches(
            sqlex("SELECT a FROM t", "SELECT DISTINCT a FROM t"), db
        )

    def test_predicted_error_counts_zero(self, db):
        assert not sql_example_matches(
            sqlex("SELECT a FROM t", "SELECT a FROM ghost"), db
        )

    def test_predicted_none_counts_zero(self, db):
        assert not sql_example_matches(sqlex("SELECT a FROM t", None), db)

    def test_gold_failure_is_fixture_defect(self, db):
        with pytest.raises(GoldSqlFails):
            sql_example_matches(sqlex("SELECT a FROM ghost", "SELECT a FROM t"), db)

    def test_average(self, db):
        examples = [
            sqlex("SELECT a FROM t", "SELECT a FROM t"),
            sqlex("SELECT a FROM t", "SELECT b FROM t"),
        ]
        assert execution_accuracy(examples, db) == 0.5

    def test_empty_example_set(self, db):
        with pytest.raises(EmptyExampleSet):
            execution_accuracy([], db)


class TestCausalMetrics:
    def test_perfect(self):
        records = [
            CausalEvalRecord("q1", 0.2, 0.2, (0.1, 0.3)),
            CausalEvalRecord("q2", -0.1, -0.1, (-0.2, 0.0)),
        ]
        scores = causal_metrics(records)
        assert scores.ci_coverage_pct == 100.0
        assert scores.mae == 0.0
        assert scores.mse == 0.0
        assert scores.max_abs_error == 0.0

    def test_single_miss(self):
        scores = causal_metrics([CausalEvalRecord("q", 3.5, 0.5, (0.4, 0.6))])
        assert scores.ci_coverage_pct == 0.0
        assert abs(scores.mae - 3.0) < 1e-12
        assert abs(scores.mse - 9.0) < 1e-12
        assert abs(scores.max_abs_error - 3.0) < 1e-12

    def test_boundary_counts_as_covered(self):
        scores = causal_metrics([CausalEvalRecord("q", 0.6, 0.5, (0.4, 0.6))])
        assert scores.ci_coverage_pct == 100.0

    def test_empty(self):
        with pytest.raises(EmptyExampleSet):
            causal_metrics([])

    @given(
        st.lists(
            st.tuples(
                st.floats(-5, 5, allow_nan=False),
                st.floats(-5, 5, allow_nan=False),
            ),
            min_size=1,
            max_size=10,
        ),
        st.randoms(),
    )
    def test_permutation_invariant(self, pairs, rand):
        records = [
            CausalEvalRecord(str(i), p, t, (t - 0.5, t + 0.5))
            for i, (p, t) in enumerate(pairs)
        ]
        shuffled = records[:]
        rand.shuffle(shuffled)
        a = causal_metrics(records)
        b = causal_metrics(shuffled)
        assert a == b


class TestJudgeDescription:
    def test_direct_percentile_score(self):
        provider = scripted(json.dumps({"score": 91}))
        verdict = judge_description("a fine table", "users", provider)
        assert verdict.score == 91.0
        assert not verdict.rubric_scaled

    def test_five_point_scaled(self):
        provider = scripted(json.dumps({"score": 4}))
        verdict = judge_description("a fine table", "users", provider)
        assert verdict.score == 80.0
        assert verdict.rubric_scaled

    def test_clamped(self):
        provider = scripted(json.dumps({"score": 250}))
        assert judge_description("d", "t", provider).score == 100.0

    def test_unparseable_twice(self):
        provider = scripted("five stars", "really five")
        with pytest.raises(JudgeUnavailable):
            judge_description("d", "t", provider)

    def test_non_numeric_score(self):
        provider = scripted(json.dumps({"score": "great"}))
        with pytest.raises(JudgeUnavailable):
            judge_description("d", "t", provider)


class TestFixtureLoading:
    def test_jsonl_retrieval(self, tmp_path):
        path = tmp_path / "retrieval.jsonl"
        path.write_text(
            '{"question": "q1", "tables": ["a"]}\n{"question": "q2", "tables": ["b"]}\n'
        )
        records = load_retrieval_fixtures(path)
        assert [r["question"] for r in records] == ["q1", "q2"]

    def test_bird_style_array(self, tmp_path):
        path = tmp_path / "mini_dev.json"
        path.write_text(
            json.dumps(
                [
                    {
                        "question_id": 0,
                        "db_id": "shop",
                        "question": "how many users?",
                        "evidence": "",
                        "SQL": "SELECT COUNT(*) FROM users",
                    }
                ]
            )
        )
        records = load_sql_fixtures(path)
        assert records == [
            {"question": "how many users?", "gold_sql": "SELECT COUNT(*) FROM users"}
        ]

    def test_missing_file(self, tmp_path):
        with pytest.raises(FixtureMissing):
            load_sql_fixtures(tmp_path / "nope.json")

    def test_malformed_record(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"question": "q"}\n')
        with pytest.raises(FixtureMissing):
            load_retrieval_fixtures(path)


def minishop():
    conn = sqlite3.connect(":memory:")
    conn.executescript(
        """
        CREATE TABLE users (id INTEGER PRIMARY KEY, name TEXT);
        CREATE TABLE orders (
            id INTEGER PRIMARY KEY, user_id INTEGER, amount REAL,
            FOREIGN KEY (user_id) REFERENCES users(id)
        );
        INSERT INTO users VALUES (1, 'ada'), (2, 'bo');
        INSERT INTO orders VALUES (1, 1, 10.0), (2, 2, 5.5);
        """
    )
    cat = catalog.snapshot(conn, "minishop")
    catalog.attach_embeddings(cat, scripted())
    return conn, cat


class TestRunTask:
    def test_task2_composition(self, tmp_path):
        conn, cat = minishop()
        fixtures = tmp_path / "retrieval.jsonl"
        fixtures.write_text('{"question": "orders per user", "tables": ["orders"]}\n')
        provider = scripted(
            json.dumps({"objective": "join orders to users"}),
            json.dumps(
                {"tables": [{"table": "orders", "reason": "target"}], "key_columns": {}}
            ),
        )
        report = run_task(2, fixtures, catalog=cat, provider=provider)
        assert report["aggregate"]["recall"] == 1.0
        assert report["rows"][0]["recommended"] == ["orders"]
        conn.close()

    def test_task3_composition(self, tmp_path):
        conn, cat = minishop()
        fixtures = tmp_path / "sql.jsonl"
        fixtures.write_text(
            json.dumps(
                {"question": "how many users?", "SQL": "SELECT COUNT(*) FROM users"}
            )
            + "\n"
        )
        provider = scripted(
            json.dumps({"objective": "count users"}),
            json.dumps({"tables": [{"table": "users", "reason": "target"}]}),
            json.dumps(
                {
                    "sub_questions": ["count rows"],
                    "sql": "SELECT COUNT(*) AS n FROM users",
                }
            ),
            json.dumps({"satisfies_request": True, "diagnosis": "ok", "feedback": ""}),
        )
        report = run_task(3, fixtures, catalog=cat, connection=conn, provider=provider)
        assert report["aggregate"]["execution_accuracy"] == 1.0
        assert report["rows"][0]["match"] is True
        conn.close()

    def test_task1_composition(self):
        conn, cat = minishop()
        provider = scripted(
            json.dumps(
                {
                    "description": "User accounts with display names.",
                    "column_notes": {},
                    "anomalies": [],
                    "suggested_analyses": ["count rows"],
                }
            ),
            json.dumps({"score": 5}),
            json.dumps(
                {
                    "description": "Orders with amounts, one row per purchase.",
                    "column_notes": {},
                    "anomalies": [],
                    "suggested_analyses": ["sum amounts"],
                }
            ),
            json.dumps({"score": 4}),
        )
        report = run_task(1, catalog=cat, provider=provider)
        assert report["aggregate"]["n_scored"] == 2
        assert report["aggregate"]["mean_score"] == 90.0
        assert report["rows"][0]["table"] == "orders"  # catalog order is sorted
        conn.close()

    def test_task1_judge_unavailable_leaves_score_absent(self):
        conn, cat = minishop()
        provider = scripted(
            json.dumps({"description": "Users.", "suggested_analyses": ["x"]}),
            "no score here",
            "still no score",
            json.dumps({"description": "Orders.", "suggested_analyses": ["x"]}),
            json.dumps({"score": 3}),
        )
        report = run_task(1, catalog=cat, provider=provider)
        assert report["aggregate"]["n_scored"] == 1
        unscored = [r for r in report["rows"] if r["score"] is None]
        assert len(unscored) == 1 and "judge_error" in unscored[0]
        conn.close()

    def test_task4_oracle_mode(self, tmp_path):
        config = DgpConfig(seed=7)
        manifest = tmp_path / "truth.json"
        save_manifest(compute_ground_truth(config), manifest)
        report = run_task(4, manifest, mode="oracle")
        agg = report["aggregate"]
        assert agg["mode"] == "oracle"
        assert agg["n_queries"] == 3
        assert agg["n_failed"] == 0
        assert agg["mae"] < 0.1
        assert len(report["rows"]) == 3
        assert all("predicted_ate" in r for r in report["rows"])

    def test_task4_missing_manifest(self, tmp_path):
        with pytest.raises(FixtureMissing):
            run_task(4, tmp_path / "ghost.json", mode="oracle")

    def test_task4_agentic_with_gold_script(self, tmp_path):
        config = DgpConfig(seed=3)
        truth = compute_ground_truth(config)
        manifest = tmp_path / "truth.json"
        save_manifest(truth, manifest)
        entries = []
        for gt in truth.queries:
            entries.extend(
                [
                    json.dumps({"objective": gt.spec.question}),
                    json.dumps(
                        {
                            "tables": [
                                {"table": "payments", "reason": "treatment"},
                                {"table": "reviews", "reason": "outcome"},
                                {"table": "users", "reason": "covariates"},
                            ]
                        }
                    ),
                    json.dumps(
                        {"sub_questions": ["join the tables"], "sql": gt.spec.gold_sql}
                    ),
                    json.dumps(
                        {"satisfies_request": True, "diagnosis": "ok", "feedback": ""}
                    ),
                    json.dumps(
                        {
                            "task": "effect_estimation",
                            "identification": "backdoor",
                            "estimation": "linear_regression",
                            "refutation": "none",
                        }
                    ),
                    "The effect is positive. The interval is tight. "
                    "Adjustment used the graph.",
                ]
            )
        provider = scripted(*entries)
        report = run_task(4, manifest, mode="agentic", provider=provider)
        assert report["aggregate"]["n_failed"] == 0
        assert report["aggregate"]["mae"] < 0.1

    def test_unknown_task(self):
        with pytest.raises(ValueError):
            run_task(9)
