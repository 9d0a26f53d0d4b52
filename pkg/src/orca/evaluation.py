"""Benchmark harness: four tasks with exact, order-invariant metrics.

Task 1 scores generated table descriptions with a judge model on a five-point
rubric (scaled to 0-100). Task 2 measures table-retrieval recall and
precision. Task 3 measures SQL execution accuracy under multiset result
equality. Task 4 compares estimated treatment effects against the synthetic
generator's replay oracle, in either oracle mode (gold SQL injected, no
generation) or agentic mode (full pipeline).
"""

from __future__ import annotations

import json
import math
import sqlite3
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from . import catalog as catalog_mod
from .analyzer import CausalQuery, analyze
from .engine import CausalModelSpec, parse_graph_text
from .errors import (
    EmptyExampleSet,
    FixtureMissing,
    GoldSqlFails,
    JudgeUnavailable,
    ParseFailure,
)
from .explorer import explore
from .providers import ChatRequest, MockProvider, MockScript, Provider
from .recommender import recommend
from .reef import VARIABLE_BINDINGS, DgpConfig, generate, load_into, load_manifest
from .text2sql import STATUS_SUCCESS, run_pipeline

RUBRIC_MAX = 5
RUBRIC_SCALE = 20  # five-point rubric -> 0-100 axis

_JUDGE_SYSTEM = """\
Score the table description below on a 5-point scale: does it accurately
name the table's purpose, cover the important columns, and stay concise and
readable? 1 = misleading or empty, 3 = partially useful, 5 = accurate,
complete, and clear. Reply with the score only."""

_JUDGE_HINT = '{"score": 4}'

_ORACLE_INTERPRETATION = (
    "The estimate quantifies how much the treatment shifts the outcome. "
    "The confidence interval reflects sampling uncertainty at the 95% level. "
    "Adjustment follows the stated causal graph."
)


# --- domain types -------------------------------------------------------------


@dataclass(frozen=True)
class RetrievalExample:
    question: str
    ground_truth_tables: frozenset[str]
    recommended_tables: frozenset[str]

    def __post_init__(self):
        if not self.ground_truth_tables:
            raise ValueError("ground_truth_tables must be non-empty")


@dataclass(frozen=True)
class RetrievalScores:
    recall: float
    precision: float
    flagged_empty: tuple[str, ...]  # questions with no recommended tables


@dataclass(frozen=True)
class SqlExample:
    question: str
    gold_sql: str
    predicted_sql: Optional[str]


@dataclass(frozen=True)
class CausalEvalRecord:
    query_id: str
    predicted_ate: float
    true_ate: float
    true_ci: tuple[float, float]


@dataclass(frozen=True)
class CausalScores:
    ci_coverage_pct: float
    mae: float
    mse: float
    max_abs_error: float


@dataclass(frozen=True)
class JudgeScore:
    score: float  # 0-100
    rubric_scaled: bool  # True when a 1-5 reply was multiplied by 20


# --- task 2: retrieval metrics --------------------------------------------------


def recall_precision(examples: Sequence[RetrievalExample]) -> RetrievalScores:
    if not examples:
        raise EmptyExampleSet("no retrieval examples")
    recalls = []
    precisions = []
    flagged = []
    for ex in examples:
        hit = len(ex.ground_truth_tables & ex.recommended_tables)
        recalls.append(hit / len(ex.ground_truth_tables))
        if ex.recommended_tables:
            precisions.append(hit / len(ex.recommended_tables))
        else:
            precisions.append(0.0)
            flagged.append(ex.question)
    n = len(examples)
    # fsum: exactly rounded, so the averages are order-independent
    return RetrievalScores(
        recall=math.fsum(recalls) / n,
        precision=math.fsum(precisions) / n,
        flagged_empty=tuple(flagged),
    )


# --- task 3: execution accuracy --------------------------------------------------


def _has_top_level_order_by(sql: str) -> bool:
    upper = sql.upper()
    depth = 0
    in_single = in_double = False
    i = 0
    while i < len(upper):
        ch = upper[i]
        if ch == "'" and not in_double:
            in_single = not in_single
        elif ch == '"' and not in_single:
            in_double = not in_double
        elif not in_single and not in_double:
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif depth == 0 and upper.startswith("ORDER", i):
                rest = upper[i + 5 :].lstrip()
                if rest.startswith("BY"):
                    return True
        i += 1
    return False


def _run_sql(connection: sqlite3.Connection, sql: str) -> tuple[list[str], list[tuple]]:
    cursor = connection.execute(sql)
    rows = cursor.fetchall()
    columns = [d[0] for d in cursor.description or []]
    return columns, [tuple(r) for r in rows]


def _reorder_to_gold(
    gold_columns: list[str], pred_columns: list[str], pred_rows: list[tuple]
) -> Optional[list[tuple]]:
    """Rearrange predicted columns into the gold projection order by name;
    None when the column multisets differ."""
    if sorted(gold_columns) != sorted(pred_columns):
        return None
    pool: dict[str, list[int]] = {}
    for i, name in enumerate(pred_columns):
        pool.setdefault(name, []).append(i)
    mapping = [pool[name].pop(0) for name in gold_columns]
    if mapping == list(range(len(pred_columns))):
        return pred_rows
    return [tuple(row[i] for i in mapping) for row in pred_rows]


def sql_example_matches(example: SqlExample, connection: sqlite3.Connection) -> bool:
    """Gold-vs-predicted result equality: multisets of rows after normalizing
    the predicted column order to the gold projection; sequence equality when
    the gold query orders its output. NULLs compare equal to each other.

    Columns are matched by name when the name multisets agree; otherwise the
    comparison is positional (predicted queries may alias columns freely), so
    only the column count has to line up."""
    try:
        gold_columns, gold_rows = _run_sql(connection, example.gold_sql)
    except sqlite3.Error as exc:
        raise GoldSqlFails(f"{example.question!r}: {exc}") from exc
    if example.predicted_sql is None:
        return False
    try:
        pred_columns, pred_rows = _run_sql(connection, example.predicted_sql)
    except sqlite3.Error:
        return False
    normalized = _reorder_to_gold(gold_columns, pred_columns, pred_rows)
    if normalized is None:
        if len(pred_columns) != len(gold_columns):
            return False
        normalized = pred_rows
    if _has_top_level_order_by(example.gold_sql):
        return gold_rows == normalized
    return Counter(gold_rows) == Counter(normalized)


def execution_accuracy(
    examples: Sequence[SqlExample], connection: sqlite3.Connection
) -> float:
    if not examples:
        raise EmptyExampleSet("no SQL examples")
    hits = sum(1 for ex in examples if sql_example_matches(ex, connection))
    return hits / len(examples)


# --- task 4: causal metrics -------------------------------------------------------


def causal_metrics(records: Sequence[CausalEvalRecord]) -> CausalScores:
    if not records:
        raise EmptyExampleSet("no causal records")
    covered = 0
    abs_errors = []
    sq_errors = []
    for r in records:
        low, high = r.true_ci
        if low <= r.predicted_ate <= high:
            covered += 1
        err = abs(r.predicted_ate - r.true_ate)
        abs_errors.append(err)
        sq_errors.append(err * err)
    n = len(records)
    # fsum keeps the aggregates independent of record order
    return CausalScores(
        ci_coverage_pct=100.0 * covered / n,
        mae=math.fsum(abs_errors) / n,
        mse=math.fsum(sq_errors) / n,
        max_abs_error=max(abs_errors),
    )


# --- task 1: judged descriptions ----------------------------------------------------


def judge_description(
    description: str, table_ref: str, provider: Provider
) -> JudgeScore:
    request = ChatRequest(
        system_text=_JUDGE_SYSTEM,
        user_text=f"Table: {table_ref}",
        context_blocks=(("description", description),),
        output_schema_hint=_JUDGE_HINT,
    )
    try:
        response = provider.chat(request)
    except ParseFailure as exc:
        raise JudgeUnavailable(str(exc)) from exc
    parsed = response.parsed if isinstance(response.parsed, dict) else {}
    raw = parsed.get("score")
    if not isinstance(raw, (int, float)) or isinstance(raw, bool):
        raise JudgeUnavailable(f"judge reply had no numeric score: {response.text!r}")
    value = float(raw)
    scaled = value <= RUBRIC_MAX
    if scaled:
        value *= RUBRIC_SCALE
    return JudgeScore(score=min(max(value, 0.0), 100.0), rubric_scaled=scaled)


# --- fixture loading ---------------------------------------------------------------


def _require(path: Optional[str | Path]) -> Path:
    if path is None:
        raise FixtureMissing("no fixture file given")
    p = Path(path)
    if not p.exists():
        raise FixtureMissing(f"fixture file not found: {p}")
    return p


def _load_records(path: Path) -> list[dict]:
    """JSON array or line-delimited records, one object per example."""
    text = path.read_text().strip()
    if not text:
        return []
    if text.startswith("["):
        payload = json.loads(text)
        if not isinstance(payload, list):
            raise FixtureMissing(f"{path}: expected a list of records")
        return payload
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def load_retrieval_fixtures(path: str | Path) -> list[dict]:
    records = _load_records(_require(path))
    for r in records:
        if "question" not in r or "tables" not in r:
            raise FixtureMissing(f"{path}: retrieval records need question + tables")
    return records


def load_sql_fixtures(path: str | Path) -> list[dict]:
    """Accepts this project's records and BIRD mini-dev files (gold SQL under
    the "SQL" key)."""
    records = _load_records(_require(path))
    out = []
    for r in records:
        gold = r.get("SQL") or r.get("gold_sql") or r.get("query")
        if "question" not in r or not gold:
            raise FixtureMissing(f"{path}: SQL records need question + SQL")
        out.append({"question": r["question"], "gold_sql": gold})
    return out


def load_table_fixtures(path: str | Path) -> list[str]:
    records = _load_records(_require(path))
    tables = []
    for r in records:
        if isinstance(r, str):
            tables.append(r)
        elif isinstance(r, dict) and "table" in r:
            tables.append(r["table"])
        else:
            raise FixtureMissing(f"{path}: table records need a table name")
    return tables


# --- task drivers --------------------------------------------------------------------


def _task1_descriptions(
    tables: Sequence[str],
    catalog,
    provider: Provider,
    judge: Optional[Provider] = None,
) -> dict:
    judge = judge or provider
    rows = []
    scores = []
    for table in tables:
        overview = explore(table, catalog, provider)
        row: dict = {"table": table, "description": overview.description}
        try:
            verdict = judge_description(overview.description, table, judge)
            row["score"] = verdict.score
            row["rubric_scaled"] = verdict.rubric_scaled
            scores.append(verdict.score)
        except JudgeUnavailable as exc:
            row["score"] = None
            row["judge_error"] = str(exc)
        rows.append(row)
    aggregate = {
        "mean_score": sum(scores) / len(scores) if scores else None,
        "n_scored": len(scores),
        "n_tables": len(tables),
    }
    return {"task": 1, "rows": rows, "aggregate": aggregate}


def _task2_retrieval(records: list[dict], catalog, provider: Provider) -> dict:
    examples = []
    rows = []
    for record in records:
        recommendation = recommend(record["question"], catalog, provider)
        got = frozenset(t for t, _ in recommendation.tables)
        ex = RetrievalExample(
            question=record["question"],
            ground_truth_tables=frozenset(record["tables"]),
            recommended_tables=got,
        )
        examples.append(ex)
        hit = len(ex.ground_truth_tables & ex.recommended_tables)
        rows.append(
            {
                "question": ex.question,
                "gold": sorted(ex.ground_truth_tables),
                "recommended": sorted(got),
                "recall": hit / len(ex.ground_truth_tables),
                "precision": hit / len(got) if got else 0.0,
            }
        )
    scores = recall_precision(examples)
    return {
        "task": 2,
        "rows": rows,
        "aggregate": {
            "recall": scores.recall,
            "precision": scores.precision,
            "flagged_empty": list(scores.flagged_empty),
        },
    }


def _task3_sql(
    records: list[dict],
    catalog,
    connection: sqlite3.Connection,
    provider: Provider,
) -> dict:
    examples = []
    rows = []
    for record in records:
        trace = run_pipeline(record["question"], catalog, connection, provider)
        predicted = trace.final_sql if trace.status == STATUS_SUCCESS else None
        example = SqlExample(
            question=record["question"],
            gold_sql=record["gold_sql"],
            predicted_sql=predicted,
        )
        examples.append(example)
        rows.append(
            {
                "question": record["question"],
                "predicted_sql": predicted,
                "pipeline_status": trace.status,
                "match": sql_example_matches(example, connection),
            }
        )
    accuracy = execution_accuracy(examples, connection)
    return {
        "task": 3,
        "rows": rows,
        "aggregate": {"execution_accuracy": accuracy, "n_examples": len(examples)},
    }


def _reef_environment(manifest_path: str | Path):
    truth = load_manifest(_require(manifest_path))
    db = generate(DgpConfig(seed=truth.seed))
    connection = sqlite3.connect(":memory:")
    load_into(db, connection)
    cat = catalog_mod.snapshot(connection, f"reef-{truth.seed}")
    return truth, connection, cat


def build_causal_query(spec) -> CausalQuery:
    graph = parse_graph_text(spec.graph_text)
    bindings = {
        name: VARIABLE_BINDINGS[name]
        for name in graph.nodes
        if name in VARIABLE_BINDINGS
    }
    return CausalQuery(
        raw_text=spec.question,
        treatment=spec.treatment,
        outcome=spec.outcome,
        graph=graph,
        variable_bindings=bindings,
        effect_question=spec.question,
    )


def build_agentic_script(truth, sql_overrides: Optional[dict] = None) -> MockScript:
    """Deterministic reply script that drives the full pipeline once per
    manifest query: objective, table selection, SQL generation, validation,
    model configuration, interpretation — six replies per query, in call
    order. ``sql_overrides`` (query_id -> SQL) swaps the generated statement,
    e.g. to study how retrieval mistakes degrade coverage."""
    overrides = sql_overrides or {}
    entries: list[tuple[str, str]] = []
    for gt in truth.queries:
        spec = gt.spec
        sql = overrides.get(spec.query_id, spec.gold_sql)
        entries.extend(
            [
                ("*", json.dumps({"objective": spec.question})),
                (
                    "*",
                    json.dumps(
                        {
                            "tables": [
                                {"table": "payments", "reason": "treatment flag"},
                                {"table": "reviews", "reason": "outcome score"},
                                {"table": "users", "reason": "activity covariate"},
                                {"table": "orders", "reason": "join bridge"},
                            ]
                        }
                    ),
                ),
                (
                    "*",
                    json.dumps(
                        {
                            "sub_questions": [
                                "join payments to orders, users, and reviews",
                                "project the analysis variables",
                            ],
                            "sql": sql,
                        }
                    ),
                ),
                (
                    "*",
                    json.dumps(
                        {"satisfies_request": True, "diagnosis": "ok", "feedback": ""}
                    ),
                ),
                (
                    "*",
                    json.dumps(
                        {
                            "task": "effect_estimation",
                            "identification": "backdoor",
                            "estimation": "linear_regression",
                            "refutation": "none",
                        }
                    ),
                ),
                ("*", _ORACLE_INTERPRETATION),
            ]
        )
    return MockScript(entries=entries, embedding_seed=0)


def _task4_causal(
    manifest_path: str | Path,
    mode: str,
    provider: Optional[Provider],
    seed: int = 0,
) -> dict:
    if mode not in ("oracle", "agentic"):
        raise ValueError(f"unknown task-4 mode {mode!r}")
    truth, connection, cat = _reef_environment(manifest_path)
    try:
        if mode == "oracle" and provider is None:
            # one interpretation call per query is the only provider use
            provider = MockProvider(
                MockScript(
                    entries=[("*", _ORACLE_INTERPRETATION)] * len(truth.queries)
                )
            )
        if mode == "agentic":
            if provider is None:
                raise ValueError("agentic mode needs a provider")
            catalog_mod.attach_embeddings(cat, provider)
        rows = []
        records = []
        for gt in truth.queries:
            query = build_causal_query(gt.spec)
            if mode == "oracle":
                spec_override = CausalModelSpec(
                    graph=query.graph,
                    treatment=query.treatment,
                    outcome=query.outcome,
                    estimation="linear_regression",
                    refutation=None,
                    seed=seed,
                )
                report = analyze(
                    query,
                    cat,
                    connection,
                    provider,
                    seed=seed,
                    injected_sql=gt.spec.gold_sql,
                    spec_override=spec_override,
                )
            else:
                report = analyze(query, cat, connection, provider, seed=seed)
            row: dict = {
                "query_id": gt.spec.query_id,
                "true_ate": gt.true_ate,
                "true_ci": list(gt.true_ci),
                "status": report.status,
            }
            if report.estimate is not None:
                record = CausalEvalRecord(
                    query_id=gt.spec.query_id,
                    predicted_ate=report.estimate.ate,
                    true_ate=gt.true_ate,
                    true_ci=gt.true_ci,
                )
                records.append(record)
                row["predicted_ate"] = report.estimate.ate
                row["covered"] = gt.true_ci[0] <= report.estimate.ate <= gt.true_ci[1]
                row["abs_error"] = abs(report.estimate.ate - gt.true_ate)
            else:
                row["predicted_ate"] = None
                row["covered"] = False
                row["error"] = report.error
            rows.append(row)

        total = len(truth.queries)
        aggregate: dict = {
            "mode": mode,
            "seed": truth.seed,
            "n_queries": total,
            "n_failed": total - len(records),
            "ci_coverage_pct": 100.0 * sum(r["covered"] for r in rows) / total,
        }
        if records:
            scores = causal_metrics(records)
            aggregate["mae"] = scores.mae
            aggregate["mse"] = scores.mse
            aggregate["max_abs_error"] = scores.max_abs_error
        return {"task": 4, "rows": rows, "aggregate": aggregate}
    finally:
        connection.close()


def run_task(
    task: int,
    fixtures: Optional[str | Path] = None,
    *,
    catalog=None,
    connection: Optional[sqlite3.Connection] = None,
    provider: Optional[Provider] = None,
    judge: Optional[Provider] = None,
    mode: str = "oracle",
    seed: int = 0,
) -> dict:
    """Drive one benchmark task over its fixture set and aggregate the metric."""
    if task == 1:
        tables = (
            load_table_fixtures(fixtures)
            if fixtures is not None
            else catalog.table_names()
        )
        return _task1_descriptions(tables, catalog, provider, judge=judge)
    if task == 2:
        return _task2_retrieval(load_retrieval_fixtures(fixtures), catalog, provider)
    if task == 3:
        return _task3_sql(load_sql_fixtures(fixtures), catalog, connection, provider)
    if task == 4:
        if fixtures is None:
            raise FixtureMissing("task 4 needs a ground-truth manifest path")
        return _task4_causal(fixtures, mode, provider, seed=seed)
    raise ValueError(f"unknown task {task!r}; expected 1-4")
