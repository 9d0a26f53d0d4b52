"""Natural language to executed SQL: decomposition, correction, validation.

Three stages per request: generation (with sub-question decomposition and
few-shot examples), execution-driven self-correction (at most three
execution attempts per generation round), and semantic validation (one
feedback-driven regeneration round). Hard cap: two generation rounds of
three attempts each, six executions total. Only read statements ever reach
the database.
"""

from __future__ import annotations

import json
import sqlite3
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Optional

from .catalog import SchemaCatalog
from .errors import (
    AttemptsExhausted,
    ConnectionFailed,
    ForbiddenStatement,
    GenerationParseFailure,
    OrcaError,
    ParseFailure,
)
from .providers import ChatRequest, Provider
from .recommender import Recommendation, recommend

MAX_ATTEMPTS_PER_ROUND = 3
MAX_GENERATION_ROUNDS = 2
PREVIEW_ROWS = 50

STATUS_SUCCESS = "success"
STATUS_EXHAUSTED = "exhausted_corrections"
STATUS_REJECTED = "rejected_by_validation"

DIAGNOSIS_OK = "ok"
DIAGNOSIS_RESTRICTIVE = "overly_restrictive_logic"
DIAGNOSIS_FLAW = "query_construction_flaw"

_GENERATE_SYSTEM = """\
You translate an analytics question into a single read-only SQL statement
for sqlite. First break the question into short sub-questions, then write
one SELECT (or WITH ... SELECT) statement that answers it. Use only the
tables and columns in the metadata below. Return exactly one statement."""

_GENERATE_HINT = '{"sub_questions": ["..."], "sql": "SELECT ..."}'

_CORRECT_SYSTEM = """\
A generated SQL statement failed to execute. Revise it so it runs, keeping
the original intent. Return exactly one statement."""

_VALIDATE_SYSTEM = """\
Judge whether the executed SQL result satisfactorily answers the user's
request. If not, diagnose the failure as overly_restrictive_logic (the query
filters away the needed rows) or query_construction_flaw (wrong joins,
columns, or aggregation) and give actionable feedback."""

_VALIDATE_HINT = (
    '{"satisfies_request": true, "diagnosis": '
    '"ok|overly_restrictive_logic|query_construction_flaw", "feedback": "..."}'
)


@dataclass(frozen=True)
class SqlAttempt:
    attempt_index: int  # 1..3 within its generation round
    sql_text: str
    execution_ok: bool
    error_message: Optional[str] = None
    row_count: Optional[int] = None
    generation_round: int = 1


@dataclass(frozen=True)
class ValidationVerdict:
    satisfies_request: bool
    diagnosis: str
    feedback: str


@dataclass
class ResultPreview:
    columns: list[str]
    rows: list[list]


@dataclass
class SqlPipelineTrace:
    request: str
    sub_questions: list[str] = field(default_factory=list)
    recommendation: Optional[Recommendation] = None
    attempts: list[SqlAttempt] = field(default_factory=list)
    validation_rounds: list[ValidationVerdict] = field(default_factory=list)
    final_sql: Optional[str] = None
    result_preview: Optional[ResultPreview] = None
    status: str = STATUS_EXHAUSTED
    events: list[dict] = field(default_factory=list)

    def log(self, stage: str, **payload) -> None:
        self.events.append({"stage": stage, **payload})

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(e, sort_keys=True) for e in self.events)


def load_fewshot(dialect: str = "sqlite") -> list[dict]:
    """Editable few-shot examples shipped as package data, two files per dialect."""
    root = resources.files(__package__) / "fewshot"
    examples: list[dict] = []
    for entry in sorted(root.iterdir(), key=lambda p: p.name):
        if not entry.name.endswith(".json"):
            continue
        payload = json.loads(entry.read_text())
        if payload.get("dialect") == dialect:
            examples.extend(payload["examples"])
    return examples


def _render_fewshot(examples: list[dict]) -> str:
    blocks = []
    for ex in examples:
        subs = "\n".join(f"  {i + 1}. {q}" for i, q in enumerate(ex["sub_questions"]))
        blocks.append(f"Q: {ex['question']}\nSub-questions:\n{subs}\nSQL: {ex['sql']}")
    return "\n\n".join(blocks)


def _render_metadata(recommendation: Recommendation, catalog: SchemaCatalog) -> str:
    lines = []
    for table, _reason in recommendation.tables:
        info = catalog.tables.get(table)
        if info is None:
            continue
        cols = ", ".join(f"{c.name} ({c.declared_type})" for c in info.columns)
        lines.append(f"{table}: {cols}")
    return "\n".join(lines) or "(no tables selected)"


def _render_fk(catalog: SchemaCatalog) -> str:
    if not catalog.fk_edges:
        return "(no foreign keys)"
    return "\n".join(
        f"{e.from_table}.{e.from_column} -> {e.to_table}.{e.to_column}"
        for e in catalog.fk_edges
    )


def _strip_fences(sql: str) -> str:
    text = sql.strip()
    if text.startswith("```"):
        text = text.split("\n", 1)[-1]
        if text.endswith("```"):
            text = text[: -len("```")]
    return text.strip()


def _is_single_statement(sql: str) -> bool:
    # quote-aware scan: semicolons inside string literals don't split statements
    in_single = in_double = False
    for i, ch in enumerate(sql):
        if ch == "'" and not in_double:
            in_single = not in_single
        elif ch == '"' and not in_single:
            in_double = not in_double
        elif ch == ";" and not in_single and not in_double:
            if sql[i + 1 :].strip():
                return False
    return True


def _leading_keyword(sql: str) -> str:
    text = sql.lstrip()
    while text.startswith("--") or text.startswith("/*"):
        if text.startswith("--"):
            text = text.split("\n", 1)[-1].lstrip()
        else:
            text = text.split("*/", 1)[-1].lstrip()
    return text.split(None, 1)[0].upper() if text.strip() else ""


def _extract_sql(parsed) -> Optional[str]:
    if not isinstance(parsed, dict):
        return None
    sql = parsed.get("sql")
    if not isinstance(sql, str) or not sql.strip():
        return None
    return _strip_fences(sql)


def generate_sql(
    request: str,
    recommendation: Recommendation,
    catalog: SchemaCatalog,
    provider: Provider,
    feedback: Optional[str] = None,
) -> tuple[list[str], str]:
    """One generation round; a structurally bad reply (missing SQL or multiple
    statements) is retried once before GenerationParseFailure."""
    context = [
        ("few-shot examples", _render_fewshot(load_fewshot())),
        ("table and column metadata", _render_metadata(recommendation, catalog)),
        ("foreign keys", _render_fk(catalog)),
    ]
    if feedback:
        context.append(("validation feedback", feedback))
    chat_request = ChatRequest(
        system_text=_GENERATE_SYSTEM,
        user_text=request,
        context_blocks=tuple(context),
        output_schema_hint=_GENERATE_HINT,
    )
    last_problem = "no SQL statement in reply"
    for _ in range(2):
        try:
            response = provider.chat(chat_request)
        except ParseFailure as exc:
            raise GenerationParseFailure(str(exc)) from exc
        sql = _extract_sql(response.parsed)
        if sql is None:
            last_problem = "no SQL statement in reply"
            continue
        if not _is_single_statement(sql):
            last_problem = "reply contained multiple statements"
            continue
        subs = response.parsed.get("sub_questions") or []
        sub_questions = [str(s) for s in subs if str(s).strip()]
        return sub_questions, sql
    raise GenerationParseFailure(last_problem)


def _execute(
    sql_text: str,
    connection: sqlite3.Connection,
    attempt_index: int,
    generation_round: int,
) -> tuple[SqlAttempt, list[str], list[tuple]]:
    keyword = _leading_keyword(sql_text)
    if keyword not in ("SELECT", "WITH"):
        raise ForbiddenStatement(
            f"only SELECT/WITH statements may run; got {keyword or 'empty statement'!r}"
        )
    if not _is_single_statement(sql_text):
        raise ForbiddenStatement("multiple statements are not allowed")
    try:
        cursor = connection.execute(sql_text)
        rows = cursor.fetchall()
        columns = [d[0] for d in cursor.description or []]
    except sqlite3.ProgrammingError as exc:
        if "closed" in str(exc).lower():
            raise ConnectionFailed(str(exc)) from exc
        return (
            SqlAttempt(attempt_index, sql_text, False, str(exc), None, generation_round),
            [],
            [],
        )
    except sqlite3.Error as exc:
        return (
            SqlAttempt(attempt_index, sql_text, False, str(exc), None, generation_round),
            [],
            [],
        )
    return (
        SqlAttempt(attempt_index, sql_text, True, None, len(rows), generation_round),
        columns,
        rows,
    )


def execute_sql(sql_text: str, connection: sqlite3.Connection) -> SqlAttempt:
    attempt, _, _ = _execute(sql_text, connection, 1, 1)
    return attempt


def self_correct(
    previous: SqlAttempt,
    request: str,
    recommendation: Recommendation,
    catalog: SchemaCatalog,
    provider: Provider,
    attempts_so_far: int,
) -> str:
    """Correction prompt carries exactly: faulty SQL, error message, table and
    column metadata, and the original user query."""
    if previous.execution_ok:
        raise ValueError("self_correct requires a failed attempt")
    if attempts_so_far >= MAX_ATTEMPTS_PER_ROUND:
        raise AttemptsExhausted(
            f"{attempts_so_far} execution attempts already made this round"
        )
    chat_request = ChatRequest(
        system_text=_CORRECT_SYSTEM,
        user_text="Return the corrected statement.",
        context_blocks=(
            ("faulty sql", previous.sql_text),
            ("error message", previous.error_message or ""),
            ("table and column metadata", _render_metadata(recommendation, catalog)),
            ("original user query", request),
        ),
        output_schema_hint='{"sql": "SELECT ..."}',
    )
    try:
        response = provider.chat(chat_request)
    except ParseFailure as exc:
        raise GenerationParseFailure(str(exc)) from exc
    sql = _extract_sql(response.parsed)
    if sql is None or not _is_single_statement(sql):
        raise GenerationParseFailure("correction reply held no usable statement")
    return sql


def _render_preview(preview: ResultPreview) -> str:
    header = ", ".join(preview.columns)
    body = "\n".join(", ".join(repr(v) for v in row) for row in preview.rows[:10])
    return f"columns: {header}\n{body or '(no rows)'}"


def validate_result(
    request: str,
    final_sql: str,
    preview: ResultPreview,
    recommendation: Recommendation,
    provider: Provider,
) -> ValidationVerdict:
    chat_request = ChatRequest(
        system_text=_VALIDATE_SYSTEM,
        user_text=f"User request: {request}",
        context_blocks=(
            ("executed sql", final_sql),
            ("result preview", _render_preview(preview)),
        ),
        output_schema_hint=_VALIDATE_HINT,
    )
    try:
        response = provider.chat(chat_request)
        parsed = response.parsed if isinstance(response.parsed, dict) else {}
        satisfied = bool(parsed.get("satisfies_request"))
        diagnosis = str(parsed.get("diagnosis", ""))
        feedback = str(parsed.get("feedback", ""))
    except ParseFailure:
        return ValidationVerdict(True, DIAGNOSIS_OK, "validation unavailable")
    if satisfied:
        return ValidationVerdict(True, DIAGNOSIS_OK, feedback)
    if diagnosis not in (DIAGNOSIS_RESTRICTIVE, DIAGNOSIS_FLAW):
        diagnosis = DIAGNOSIS_FLAW
    return ValidationVerdict(False, diagnosis, feedback)


def run_pipeline(
    request: str,
    catalog: SchemaCatalog,
    connection: sqlite3.Connection,
    provider: Provider,
    recommendation: Optional[Recommendation] = None,
    injected_sql: Optional[str] = None,
    max_attempts: int = MAX_ATTEMPTS_PER_ROUND,
) -> SqlPipelineTrace:
    """recommend -> generate -> (execute | self-correct)* -> validate.

    With injected_sql set, generation and validation are bypassed entirely
    (used to isolate downstream consumers from the language model).

    max_attempts may lower the per-round execution budget but never raise it
    past the hard cap.

    Any stage error is re-raised with the partial trace attached as
    ``exc.trace`` so callers can still log what happened."""
    trace = SqlPipelineTrace(request=request)
    max_attempts = max(1, min(max_attempts, MAX_ATTEMPTS_PER_ROUND))
    try:
        return _run_pipeline(
            trace, request, catalog, connection, provider, recommendation,
            injected_sql, max_attempts,
        )
    except OrcaError as exc:
        trace.log("error", kind=type(exc).__name__, message=str(exc))
        exc.trace = trace
        raise


def _run_pipeline(
    trace: SqlPipelineTrace,
    request: str,
    catalog: SchemaCatalog,
    connection: sqlite3.Connection,
    provider: Provider,
    recommendation: Optional[Recommendation],
    injected_sql: Optional[str],
    max_attempts: int = MAX_ATTEMPTS_PER_ROUND,
) -> SqlPipelineTrace:
    if injected_sql is not None:
        trace.log("inject", sql=injected_sql)
        attempt, columns, rows = _execute(injected_sql, connection, 1, 1)
        trace.attempts.append(attempt)
        trace.log("execute", ok=attempt.execution_ok, error=attempt.error_message,
                  rows=attempt.row_count)
        if attempt.execution_ok:
            trace.status = STATUS_SUCCESS
            trace.final_sql = injected_sql
            trace.result_preview = ResultPreview(
                columns=columns, rows=[list(r) for r in rows[:PREVIEW_ROWS]]
            )
        trace.log("final", status=trace.status, final_sql=trace.final_sql)
        return trace

    if recommendation is None:
        recommendation = recommend(request, catalog, provider)
    trace.recommendation = recommendation
    trace.log(
        "recommend",
        tables=[t for t, _ in recommendation.tables],
        objective=recommendation.objective,
    )

    feedback: Optional[str] = None
    for round_no in range(1, MAX_GENERATION_ROUNDS + 1):
        sub_questions, sql = generate_sql(
            request, recommendation, catalog, provider, feedback=feedback
        )
        trace.sub_questions.extend(sub_questions)
        trace.log("generate", round=round_no, sub_questions=sub_questions, sql=sql)

        attempt_index = 0
        columns: list[str] = []
        rows: list[tuple] = []
        attempt: Optional[SqlAttempt] = None
        while attempt_index < max_attempts:
            attempt_index += 1
            attempt, columns, rows = _execute(sql, connection, attempt_index, round_no)
            trace.attempts.append(attempt)
            trace.log(
                "execute",
                round=round_no,
                attempt=attempt_index,
                ok=attempt.execution_ok,
                error=attempt.error_message,
                rows=attempt.row_count,
            )
            if attempt.execution_ok:
                break
            if attempt_index >= max_attempts:
                break
            sql = self_correct(
                attempt, request, recommendation, catalog, provider, attempt_index
            )
            trace.log("correct", round=round_no, sql=sql)

        if attempt is None or not attempt.execution_ok:
            trace.status = STATUS_EXHAUSTED
            trace.log("final", status=trace.status, final_sql=None)
            return trace

        preview = ResultPreview(
            columns=columns, rows=[list(r) for r in rows[:PREVIEW_ROWS]]
        )
        verdict = validate_result(request, sql, preview, recommendation, provider)
        trace.validation_rounds.append(verdict)
        trace.log(
            "validate",
            round=round_no,
            satisfied=verdict.satisfies_request,
            diagnosis=verdict.diagnosis,
            feedback=verdict.feedback,
        )
        if verdict.satisfies_request:
            trace.status = STATUS_SUCCESS
            trace.final_sql = sql
            trace.result_preview = preview
            trace.log("final", status=trace.status, final_sql=sql)
            return trace
        feedback = verdict.feedback or verdict.diagnosis

    trace.status = STATUS_REJECTED
    trace.log("final", status=trace.status, final_sql=None)
    return trace


def trace_to_dict(trace: SqlPipelineTrace) -> dict:
    """JSON-ready structural dump (dataclasses flattened)."""
    return {
        "request": trace.request,
        "sub_questions": trace.sub_questions,
        "recommendation": asdict(trace.recommendation) if trace.recommendation else None,
        "attempts": [asdict(a) for a in trace.attempts],
        "validation_rounds": [asdict(v) for v in trace.validation_rounds],
        "final_sql": trace.final_sql,
        "result_preview": asdict(trace.result_preview) if trace.result_preview else None,
        "status": trace.status,
        "events": trace.events,
    }
