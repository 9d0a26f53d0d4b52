"""Generation, bounded self-correction, validation loop, and the read guard."""

import json
import sqlite3

import pytest

from orca import catalog
from orca.errors import (
    AttemptsExhausted,
    ForbiddenStatement,
    GenerationParseFailure,
)
from orca.providers import MockProvider, MockScript
from orca.recommender import Recommendation
from orca.text2sql import (
    MAX_ATTEMPTS_PER_ROUND,
    STATUS_EXHAUSTED,
    STATUS_REJECTED,
    STATUS_SUCCESS,
    execute_sql,
    generate_sql,
    load_fewshot,
    run_pipeline,
    self_correct,
    trace_to_dict,
    validate_result,
    ResultPreview,
    SqlAttempt,
)


@pytest.fixture()
def db():
    conn = sqlite3.connect(":memory:")
    conn.executescript(
        """
        CREATE TABLE users (id INTEGER PRIMARY KEY, name TEXT, active INTEGER);
        CREATE TABLE orders (
            id INTEGER PRIMARY KEY, user_id INTEGER, amount REAL,
            FOREIGN KEY (user_id) REFERENCES users(id)
        );
        """
    )
    conn.executemany(
        "INSERT INTO users VALUES (?,?,?)", [(1, "ada", 1), (2, "bo", 0), (3, "cy", 1)]
    )
    conn.executemany(
        "INSERT INTO orders VALUES (?,?,?)", [(1, 1, 10.0), (2, 1, 20.0), (3, 2, 5.0)]
    )
    yield conn
    conn.close()


@pytest.fixture()
def cat(db):
    snap = catalog.snapshot(db, "minishop")
    provider = MockProvider(MockScript(entries=(), embedding_seed=1))
    catalog.attach_embeddings(snap, provider)
    return snap


@pytest.fixture()
def reco():
    return Recommendation(
        objective="Count active users.",
        tables=[("users", "holds activity flag"), ("orders", "spend amounts")],
    )


def scripted(*responses):
    return MockProvider(
        MockScript(entries=tuple(("*", r) for r in responses), embedding_seed=1)
    )


def gen_reply(sql, subs=("find the rows", "aggregate them")):
    return json.dumps({"sub_questions": list(subs), "sql": sql})


def fix_reply(sql):
    return json.dumps({"sql": sql})


def verdict_reply(satisfied, diagnosis="ok", feedback=""):
    return json.dumps(
        {"satisfies_request": satisfied, "diagnosis": diagnosis, "feedback": feedback}
    )


class TestFewshot:
    def test_fixtures_load(self):
        examples = load_fewshot("sqlite")
        assert len(examples) >= 4
        for ex in examples:
            assert ex["question"] and ex["sql"].upper().startswith("SELECT")
            assert ex["sub_questions"]

    def test_unknown_dialect_empty(self):
        assert load_fewshot("oracle11g") == []


class TestGenerateSql:
    def test_parses_sub_questions_and_sql(self, cat, reco):
        provider = scripted(
            gen_reply("SELECT COUNT(*) FROM users WHERE active = 1",
                      subs=["filter active users", "count per month"])
        )
        subs, sql = generate_sql("how many active users?", reco, cat, provider)
        assert subs == ["filter active users", "count per month"]
        assert sql == "SELECT COUNT(*) FROM users WHERE active = 1"

    def test_prompt_carries_fewshot_metadata_and_fks(self, cat, reco):
        provider = scripted(gen_reply("SELECT 1"))
        generate_sql("anything", reco, cat, provider)
        prompt = provider.transcript[0][0]
        assert "few-shot examples" in prompt
        assert "users: id (INTEGER)" in prompt
        assert "orders.user_id -> users.id" in prompt

    def test_multi_statement_retried_once_then_accepted(self, cat, reco):
        provider = scripted(
            gen_reply("SELECT 1; SELECT 2"),
            gen_reply("SELECT 2"),
        )
        _, sql = generate_sql("q", reco, cat, provider)
        assert sql == "SELECT 2"
        assert provider.calls_made == 2

    def test_semicolon_inside_literal_is_single(self, cat, reco):
        provider = scripted(gen_reply("SELECT ';' AS sep FROM users"))
        _, sql = generate_sql("q", reco, cat, provider)
        assert sql == "SELECT ';' AS sep FROM users"

    def test_trailing_semicolon_is_single(self, cat, reco):
        provider = scripted(gen_reply("SELECT 1;"))
        _, sql = generate_sql("q", reco, cat, provider)
        assert sql == "SELECT 1;"

    def test_missing_sql_twice_raises(self, cat, reco):
        provider = scripted(
            json.dumps({"sub_questions": ["a"]}),
            json.dumps({"not_sql": True}),
        )
        with pytest.raises(GenerationParseFailure):
            generate_sql("q", reco, cat, provider)

    def test_code_fences_stripped(self, cat, reco):
        provider = scripted(gen_reply("```sql\nSELECT 42\n```"))
        _, sql = generate_sql("q", reco, cat, provider)
        assert sql == "SELECT 42"

    def test_feedback_block_appended(self, cat, reco):
        provider = scripted(gen_reply("SELECT 1"))
        generate_sql("q", reco, cat, provider, feedback="drop the status filter")
        prompt = provider.transcript[0][0]
        assert "validation feedback" in prompt and "drop the status filter" in prompt


class TestExecuteSql:
    def test_select_one(self, db):
        attempt = execute_sql("SELECT 1", db)
        assert attempt.execution_ok and attempt.row_count == 1
        assert attempt.error_message is None

    def test_database_error_captured_verbatim(self, db):
        attempt = execute_sql("SELECT * FROM nonexistent_xyz", db)
        assert not attempt.execution_ok
        assert "nonexistent_xyz" in attempt.error_message
        assert attempt.row_count is None

    def test_drop_blocked_before_database(self, db):
        with pytest.raises(ForbiddenStatement):
            execute_sql("DROP TABLE users", db)
        assert db.execute("SELECT COUNT(*) FROM users").fetchone()[0] == 3

    @pytest.mark.parametrize(
        "sql",
        [
            "DELETE FROM users",
            "INSERT INTO users VALUES (9,'x',1)",
            "UPDATE users SET active = 0",
            "CREATE TABLE t (x)",
            "PRAGMA journal_mode=WAL",
        ],
    )
    def test_writes_refused(self, db, sql):
        with pytest.raises(ForbiddenStatement):
            execute_sql(sql, db)

    def test_leading_comment_allowed(self, db):
        attempt = execute_sql("-- count\nSELECT COUNT(*) FROM users", db)
        assert attempt.execution_ok

    def test_comment_hiding_a_write_blocked(self, db):
        with pytest.raises(ForbiddenStatement):
            execute_sql("/* SELECT */ DELETE FROM users", db)

    def test_cte_allowed(self, db):
        attempt = execute_sql(
            "WITH t AS (SELECT amount FROM orders) SELECT SUM(amount) FROM t", db
        )
        assert attempt.execution_ok and attempt.row_count == 1

    def test_piggybacked_statement_blocked(self, db):
        with pytest.raises(ForbiddenStatement):
            execute_sql("SELECT 1; DROP TABLE users", db)
        assert db.execute("SELECT COUNT(*) FROM users").fetchone()[0] == 3


class TestSelfCorrect:
    def failed(self, sql="SELECT * FROM nope", err="no such table: nope"):
        return SqlAttempt(1, sql, False, err, None, 1)

    def test_prompt_has_exactly_four_context_blocks(self, cat, reco):
        provider = scripted(fix_reply("SELECT * FROM users"))
        sql = self_correct(self.failed(), "show users", reco, cat, provider, 1)
        assert sql == "SELECT * FROM users"
        prompt = provider.transcript[0][0]
        for label in (
            "faulty sql",
            "error message",
            "table and column metadata",
            "original user query",
        ):
            assert label in prompt
        assert "no such table: nope" in prompt
        assert "show users" in prompt

    def test_successful_previous_rejected(self, cat, reco):
        good = SqlAttempt(1, "SELECT 1", True, None, 1, 1)
        with pytest.raises(ValueError):
            self_correct(good, "q", reco, cat, scripted(), 1)

    def test_attempts_cap(self, cat, reco):
        with pytest.raises(AttemptsExhausted):
            self_correct(self.failed(), "q", reco, cat, scripted(), MAX_ATTEMPTS_PER_ROUND)


class TestValidateResult:
    def preview(self):
        return ResultPreview(columns=["n"], rows=[[3]])

    def test_satisfied(self, reco):
        provider = scripted(verdict_reply(True))
        verdict = validate_result("q", "SELECT 3", self.preview(), reco, provider)
        assert verdict.satisfies_request and verdict.diagnosis == "ok"

    def test_unsatisfied_keeps_diagnosis(self, reco):
        provider = scripted(
            verdict_reply(False, "overly_restrictive_logic", "loosen the filter")
        )
        verdict = validate_result("q", "SELECT 0", self.preview(), reco, provider)
        assert not verdict.satisfies_request
        assert verdict.diagnosis == "overly_restrictive_logic"
        assert verdict.feedback == "loosen the filter"

    def test_inconsistent_diagnosis_normalized(self, reco):
        provider = scripted(verdict_reply(False, "ok", "odd"))
        verdict = validate_result("q", "SELECT 0", self.preview(), reco, provider)
        assert verdict.diagnosis == "query_construction_flaw"

    def test_parse_failure_degrades_to_ok(self, reco):
        provider = scripted("not json at all", "still not json")
        verdict = validate_result("q", "SELECT 1", self.preview(), reco, provider)
        assert verdict.satisfies_request
        assert verdict.feedback == "validation unavailable"


class TestRunPipeline:
    def test_green_first_pass(self, db, cat, reco):
        provider = scripted(
            gen_reply("SELECT COUNT(*) AS n FROM users WHERE active = 1"),
            verdict_reply(True),
        )
        trace = run_pipeline("count active users", cat, db, provider,
                             recommendation=reco)
        assert trace.status == STATUS_SUCCESS
        assert len(trace.attempts) == 1
        assert len(trace.validation_rounds) == 1
        assert trace.final_sql == "SELECT COUNT(*) AS n FROM users WHERE active = 1"
        assert trace.result_preview.rows == [[2]]
        assert trace.sub_questions == ["find the rows", "aggregate them"]

    def test_fail_fail_pass_is_three_attempts(self, db, cat, reco):
        provider = scripted(
            gen_reply("SELECT * FROM ghost_one"),
            fix_reply("SELECT * FROM ghost_two"),
            fix_reply("SELECT name FROM users ORDER BY id"),
            verdict_reply(True),
        )
        trace = run_pipeline("list users", cat, db, provider, recommendation=reco)
        assert trace.status == STATUS_SUCCESS
        assert [a.execution_ok for a in trace.attempts] == [False, False, True]
        assert [a.attempt_index for a in trace.attempts] == [1, 2, 3]
        assert trace.final_sql == "SELECT name FROM users ORDER BY id"
        assert trace.result_preview.rows == [["ada"], ["bo"], ["cy"]]

    def test_three_failures_exhausts_without_fourth_call(self, db, cat, reco):
        provider = scripted(
            gen_reply("SELECT * FROM ghost_one"),
            fix_reply("SELECT * FROM ghost_two"),
            fix_reply("SELECT * FROM ghost_three"),
        )
        trace = run_pipeline("list users", cat, db, provider, recommendation=reco)
        assert trace.status == STATUS_EXHAUSTED
        assert len(trace.attempts) == 3
        assert all(not a.execution_ok for a in trace.attempts)
        assert trace.final_sql is None and trace.result_preview is None
        # one generation + two corrections; no fourth correction, no validation
        assert provider.calls_made == 3
        assert provider.remaining == 0

    def test_validation_reject_then_regenerate_succeeds(self, db, cat, reco):
        provider = scripted(
            gen_reply("SELECT COUNT(*) AS n FROM users WHERE active = 99"),
            verdict_reply(False, "overly_restrictive_logic", "active is 0/1"),
            gen_reply("SELECT COUNT(*) AS n FROM users WHERE active = 1"),
            verdict_reply(True),
        )
        trace = run_pipeline("count active", cat, db, provider, recommendation=reco)
        assert trace.status == STATUS_SUCCESS
        assert len(trace.validation_rounds) == 2
        assert [a.generation_round for a in trace.attempts] == [1, 2]
        assert trace.result_preview.rows == [[2]]
        # regeneration prompt carried the validation feedback
        regen_prompt = provider.transcript[2][0]
        assert "active is 0/1" in regen_prompt

    def test_validation_reject_twice_is_rejected(self, db, cat, reco):
        provider = scripted(
            gen_reply("SELECT 0 AS n"),
            verdict_reply(False, "query_construction_flaw", "wrong table"),
            gen_reply("SELECT 0 AS n"),
            verdict_reply(False, "query_construction_flaw", "still wrong"),
        )
        trace = run_pipeline("count things", cat, db, provider, recommendation=reco)
        assert trace.status == STATUS_REJECTED
        assert trace.final_sql is None
        assert [v.feedback for v in trace.validation_rounds] == [
            "wrong table",
            "still wrong",
        ]

    def test_hard_cap_six_executions(self, db, cat, reco):
        provider = scripted(
            gen_reply("SELECT * FROM g1"),
            fix_reply("SELECT * FROM g2"),
            fix_reply("SELECT name FROM users"),
            verdict_reply(False, "query_construction_flaw", "need amounts"),
            gen_reply("SELECT * FROM g3"),
            fix_reply("SELECT * FROM g4"),
            fix_reply("SELECT amount FROM orders"),
            verdict_reply(False, "query_construction_flaw", "no"),
        )
        trace = run_pipeline("amounts", cat, db, provider, recommendation=reco)
        assert trace.status == STATUS_REJECTED
        assert len(trace.attempts) == 6
        assert [a.generation_round for a in trace.attempts] == [1, 1, 1, 2, 2, 2]
        assert provider.remaining == 0

    def test_forbidden_generation_raises_with_trace(self, db, cat, reco):
        provider = scripted(gen_reply("DROP TABLE users"))
        with pytest.raises(ForbiddenStatement) as excinfo:
            run_pipeline("drop it", cat, db, provider, recommendation=reco)
        assert db.execute("SELECT COUNT(*) FROM users").fetchone()[0] == 3
        partial = excinfo.value.trace
        assert partial.request == "drop it"
        assert partial.events[-1]["kind"] == "ForbiddenStatement"

    def test_injected_sql_skips_provider(self, db, cat):
        provider = scripted()  # empty script: any provider call would blow up
        trace = run_pipeline(
            "irrelevant", cat, db, provider,
            injected_sql="SELECT id FROM users ORDER BY id",
        )
        assert trace.status == STATUS_SUCCESS
        assert trace.final_sql == "SELECT id FROM users ORDER BY id"
        assert trace.result_preview.rows == [[1], [2], [3]]
        assert provider.calls_made == 0
        assert trace.events[0]["stage"] == "inject"

    def test_injected_sql_failure_reported(self, db, cat):
        trace = run_pipeline(
            "irrelevant", cat, db, scripted(), injected_sql="SELECT * FROM ghost"
        )
        assert trace.status == STATUS_EXHAUSTED
        assert trace.final_sql is None
        assert not trace.attempts[0].execution_ok

    def test_preview_capped_at_fifty_rows(self, db, cat):
        db.executemany(
            "INSERT INTO orders VALUES (?,?,?)",
            [(i, 1, float(i)) for i in range(10, 110)],
        )
        trace = run_pipeline(
            "all orders", cat, db, scripted(), injected_sql="SELECT id FROM orders"
        )
        assert trace.attempts[0].row_count == 103
        assert len(trace.result_preview.rows) == 50

    def test_events_form_a_replayable_log(self, db, cat, reco):
        provider = scripted(
            gen_reply("SELECT * FROM ghost"),
            fix_reply("SELECT COUNT(*) FROM users"),
            verdict_reply(True),
        )
        trace = run_pipeline("count", cat, db, provider, recommendation=reco)
        stages = [e["stage"] for e in trace.events]
        assert stages == [
            "recommend",
            "generate",
            "execute",
            "correct",
            "execute",
            "validate",
            "final",
        ]
        lines = trace.to_jsonl().splitlines()
        assert len(lines) == len(trace.events)
        assert all(json.loads(line) for line in lines)

    def test_trace_to_dict_round_trips_json(self, db, cat, reco):
        provider = scripted(gen_reply("SELECT 1"), verdict_reply(True))
        trace = run_pipeline("one", cat, db, provider, recommendation=reco)
        payload = json.loads(json.dumps(trace_to_dict(trace)))
        assert payload["status"] == "success"
        assert payload["attempts"][0]["sql_text"] == "SELECT 1"

    def test_identical_runs_identical_traces(self, db, cat, reco):
        def run():
            conn = sqlite3.connect(":memory:")
            conn.executescript("CREATE TABLE users (id INTEGER, active INTEGER);")
            conn.execute("INSERT INTO users VALUES (1, 1)")
            provider = scripted(
                gen_reply("SELECT COUNT(*) FROM users"), verdict_reply(True)
            )
            trace = run_pipeline("count", cat, conn, provider, recommendation=reco)
            return json.dumps(trace_to_dict(trace), sort_keys=True)

        assert run() == run()
