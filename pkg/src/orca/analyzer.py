"""Causal analysis orchestration: retrieve, configure, estimate, explain.

Four stages over a routed causal question: data preparation through the SQL
pipeline (with typed encodings and listwise null deletion), configuration
selection against a fixed option menu (with deterministic repair), model
implementation through the native engine, and a bounded natural-language
interpretation. Every stage appends to an ordered trace; a stage failure
produces a partial report instead of losing the trace.
"""

from __future__ import annotations

import json
import re
import sqlite3
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from typing import Optional

import numpy as np

from .catalog import SchemaCatalog
from .engine import (
    BACKDOOR,
    EFFECT_ESTIMATION,
    ESTIMATION_METHODS,
    LINEAR,
    PLACEBO,
    PROPENSITY_METHODS,
    REFUTATION_TECHNIQUES,
    CausalGraph,
    CausalModelSpec,
    EffectEstimate,
    Estimand,
    RefutationResult,
    estimate_effect,
    identify_backdoor,
    refute_estimate,
    validate_model_spec,
)
from .errors import (
    EmptyDataset,
    HighCardinalityColumn,
    OrcaError,
    OutcomeNotNumeric,
    ParseFailure,
    RetrievalFailed,
    TreatmentNotBinaryOrNumeric,
)
from .providers import ChatRequest, Provider
from .text2sql import STATUS_SUCCESS, SqlPipelineTrace, run_pipeline

ONE_HOT_MAX_LEVELS = 10
SAMPLE_ROWS = 20
MIN_SENTENCES = 3
MAX_SENTENCES = 6

ENC_NONE = "none"
ENC_BINARY = "binary01"
ENC_INTEGER_CODES = "integer_codes"
ENC_ONE_HOT = "one_hot"
ENC_EPOCH_DAYS = "epoch_days"

NORM_NONE = "none"
NORM_ZSCORE = "zscore"

_METHOD_MENU = (
    (LINEAR, "ordinary least squares of outcome on treatment plus adjustment"),
    ("propensity_matching", "1-nearest-neighbour match on propensity score (binary treatment only)"),
    ("propensity_stratification", "average of within-stratum contrasts over propensity quintiles (binary treatment only)"),
    ("propensity_weighting", "inverse-propensity weighted mean difference (binary treatment only)"),
)

_REFUTER_MENU = (
    (PLACEBO, "permute the treatment column; the effect should vanish"),
    ("random_common_cause", "add an independent noise covariate; the effect should be stable"),
    ("data_subset", "re-estimate on a random 80% subset; intervals should overlap"),
    ("none", "skip refutation"),
)

_SELECT_SYSTEM = """\
Choose a causal-inference configuration for the question below. Review the
question, the variables, and the data sample, then pick one value for each
of task, identification, estimation, and refutation from the menu."""

_SELECT_HINT = (
    '{"task": "effect_estimation", "identification": "backdoor", '
    '"estimation": "...", "refutation": "..."}'
)

_INTERPRET_SYSTEM = """\
Explain the causal estimate below for a non-statistician in three to six
sentences. Include the direction and size of the effect, the uncertainty,
any assumptions or limitations, and the robustness-check outcome if one was
run."""


@dataclass(frozen=True)
class CausalQuery:
    """A routed causal question with its graph and variable-to-column bindings."""

    raw_text: str
    treatment: str
    outcome: str
    graph: CausalGraph
    variable_bindings: dict[str, tuple[str, str]]
    effect_question: str = ""

    def __post_init__(self):
        for name in (self.treatment, self.outcome):
            if name not in self.variable_bindings:
                raise ValueError(f"{name!r} has no (table, column) binding")
        observed = set(self.graph.nodes) - self.graph.unobserved
        unbound = observed - set(self.variable_bindings)
        if unbound:
            raise ValueError(f"graph nodes without bindings: {sorted(unbound)}")
        bound_latent = self.graph.unobserved & set(self.variable_bindings)
        if bound_latent:
            raise ValueError(
                f"unobserved nodes cannot be bound to columns: {sorted(bound_latent)}"
            )

    @property
    def question(self) -> str:
        return self.effect_question or self.raw_text


@dataclass(frozen=True)
class ColumnEncoding:
    original_type: str  # integer | real | boolean | text | timestamp
    encoding: str  # none | binary01 | integer_codes | one_hot | epoch_days
    normalization: str = NORM_NONE
    levels: tuple[str, ...] = ()
    produced: tuple[str, ...] = ()


@dataclass
class PreparedDataset:
    columns: dict[str, np.ndarray]
    encodings: dict[str, ColumnEncoding]
    row_count: int
    dropped_rows: int
    drop_reasons: dict[str, int]
    source_sql: str = ""

    def design_names(self, variable: str) -> list[str]:
        return list(self.encodings[variable].produced)

    def head(self, n: int = SAMPLE_ROWS) -> list[dict]:
        names = list(self.columns)
        return [
            {name: self.columns[name][i].item() for name in names}
            for i in range(min(n, self.row_count))
        ]


@dataclass
class AnalysisReport:
    query: CausalQuery
    status: str = "incomplete"
    spec: Optional[CausalModelSpec] = None
    estimand: Optional[Estimand] = None
    estimate: Optional[EffectEstimate] = None
    refutation: Optional[RefutationResult] = None
    interpretation: str = ""
    dataset: Optional[PreparedDataset] = None
    sql_trace: Optional[SqlPipelineTrace] = None
    error: Optional[str] = None
    trace: list[dict] = field(default_factory=list)

    def log(self, stage: str, **payload) -> None:
        self.trace.append({"stage": stage, **payload})

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(e, sort_keys=True, default=str) for e in self.trace)


# --- data preparation ---------------------------------------------------------


def _validate_bindings(query: CausalQuery, catalog: SchemaCatalog) -> None:
    for variable, (table, column) in query.variable_bindings.items():
        info = catalog.tables.get(table)
        if info is None:
            raise ValueError(f"binding {variable!r}: unknown table {table!r}")
        if column not in {c.name for c in info.columns}:
            raise ValueError(f"binding {variable!r}: no column {table}.{column}")


def _retrieval_request(query: CausalQuery) -> str:
    parts = [
        f"{var} (from {table}.{column})"
        for var, (table, column) in sorted(query.variable_bindings.items())
    ]
    return (
        "Retrieve one row per observation for a causal analysis. "
        f"Output exactly these columns, aliased as named: {', '.join(parts)}. "
        f"Context: {query.question}"
    )


def _parse_timestamp(value: str) -> Optional[float]:
    try:
        parsed = datetime.fromisoformat(value)
    except (ValueError, TypeError):
        return None
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    epoch = datetime(1970, 1, 1, tzinfo=timezone.utc)
    return (parsed - epoch).total_seconds() / 86400.0


def _observed_type(values: list) -> str:
    kinds = set()
    for v in values:
        if isinstance(v, bool):
            kinds.add("boolean")
        elif isinstance(v, int):
            kinds.add("integer")
        elif isinstance(v, float):
            kinds.add("real")
        elif isinstance(v, (date, datetime)):
            kinds.add("timestamp")
        elif isinstance(v, str):
            kinds.add("timestamp" if _parse_timestamp(v) is not None else "text")
        else:
            kinds.add("text")
    if kinds == {"boolean"}:
        return "boolean"
    if kinds <= {"integer", "boolean"}:
        return "integer"
    if kinds <= {"integer", "real", "boolean"}:
        return "real"
    if kinds == {"timestamp"}:
        return "timestamp"
    return "text"


def _is_binary(values: np.ndarray) -> bool:
    return bool(np.isin(np.unique(values), (0.0, 1.0)).all())


def _encode_numeric(values: list, original: str) -> tuple[np.ndarray, str]:
    arr = np.asarray([float(v) for v in values])
    if original == "boolean" or _is_binary(arr):
        return arr, ENC_BINARY
    return arr, ENC_NONE


def _encode_timestamp(values: list) -> np.ndarray:
    out = []
    for v in values:
        if isinstance(v, datetime):
            v = v.isoformat()
        elif isinstance(v, date):
            v = v.isoformat()
        out.append(_parse_timestamp(v))
    return np.asarray(out, dtype=float)


def _encode_variable(
    variable: str,
    values: list,
    role: str,  # treatment | outcome | covariate
) -> tuple[dict[str, np.ndarray], ColumnEncoding]:
    original = _observed_type(values)

    if original in ("integer", "real", "boolean"):
        arr, encoding = _encode_numeric(values, original)
        return {variable: arr}, ColumnEncoding(original, encoding, produced=(variable,))

    if original == "timestamp":
        arr = _encode_timestamp(values)
        return {variable: arr}, ColumnEncoding(
            original, ENC_EPOCH_DAYS, produced=(variable,)
        )

    # text
    levels = sorted({str(v) for v in values})
    if role == "outcome":
        raise OutcomeNotNumeric(
            f"outcome {variable!r} is text with levels {levels[:5]}"
        )
    if role == "treatment":
        if len(levels) != 2:
            raise TreatmentNotBinaryOrNumeric(
                f"treatment {variable!r} is text with {len(levels)} levels; "
                "need a numeric or two-level variable"
            )
        mapping = {levels[0]: 0.0, levels[1]: 1.0}
        arr = np.asarray([mapping[str(v)] for v in values])
        return {variable: arr}, ColumnEncoding(
            original, ENC_BINARY, levels=tuple(levels), produced=(variable,)
        )
    if len(levels) > ONE_HOT_MAX_LEVELS:
        raise HighCardinalityColumn(
            f"covariate {variable!r} has {len(levels)} distinct values "
            f"(limit {ONE_HOT_MAX_LEVELS})"
        )
    # one-hot with the first (sorted) level dropped as reference
    produced = {}
    names = []
    for level in levels[1:]:
        name = f"{variable}={level}"
        produced[name] = np.asarray([1.0 if str(v) == level else 0.0 for v in values])
        names.append(name)
    if not names:  # single level: constant, contributes nothing
        names = [f"{variable}={levels[0]}"]
        produced[names[0]] = np.zeros(len(values))
    return produced, ColumnEncoding(
        original, ENC_ONE_HOT, levels=tuple(levels), produced=tuple(names)
    )


def prepare_data(
    query: CausalQuery,
    catalog: SchemaCatalog,
    connection: sqlite3.Connection,
    provider: Provider,
    injected_sql: Optional[str] = None,
    normalize: bool = False,
) -> tuple[PreparedDataset, SqlPipelineTrace]:
    """Fetch and encode one column per bound variable.

    Data flows through the SQL pipeline (or the caller-supplied statement);
    the final statement is then re-executed to obtain the full result, since
    traces only keep a preview."""
    _validate_bindings(query, catalog)
    trace = run_pipeline(
        _retrieval_request(query),
        catalog,
        connection,
        provider,
        injected_sql=injected_sql,
    )
    if trace.status != STATUS_SUCCESS or trace.final_sql is None:
        raise RetrievalFailed(
            f"SQL pipeline ended with status {trace.status!r}", trace=trace
        )

    cursor = connection.execute(trace.final_sql)
    rows = cursor.fetchall()
    result_columns = [d[0] for d in cursor.description or []]

    missing = [v for v in query.variable_bindings if v not in result_columns]
    if missing:
        raise RetrievalFailed(
            f"retrieved result lacks columns for: {', '.join(sorted(missing))}",
            trace=trace,
        )
    index = {name: i for i, name in enumerate(result_columns)}
    variables = sorted(query.variable_bindings)

    # listwise deletion over the bound variables, with per-variable accounting
    drop_reasons: dict[str, int] = {}
    kept_rows = []
    for row in rows:
        null_vars = [v for v in variables if row[index[v]] is None]
        if null_vars:
            for v in null_vars:
                drop_reasons[f"null_in_{v}"] = drop_reasons.get(f"null_in_{v}", 0) + 1
        else:
            kept_rows.append(row)
    dropped = len(rows) - len(kept_rows)
    if not kept_rows:
        raise EmptyDataset(
            f"no complete rows left ({len(rows)} fetched, {dropped} dropped)"
        )

    columns: dict[str, np.ndarray] = {}
    encodings: dict[str, ColumnEncoding] = {}
    for variable in variables:
        values = [row[index[variable]] for row in kept_rows]
        if variable == query.treatment:
            role = "treatment"
        elif variable == query.outcome:
            role = "outcome"
        else:
            role = "covariate"
        produced, encoding = _encode_variable(variable, values, role)
        if normalize and role == "covariate" and encoding.encoding in (
            ENC_NONE,
            ENC_EPOCH_DAYS,
        ):
            for name, arr in list(produced.items()):
                sd = float(arr.std())
                if sd > 0:
                    produced[name] = (arr - arr.mean()) / sd
            encoding = ColumnEncoding(
                encoding.original_type,
                encoding.encoding,
                NORM_ZSCORE,
                encoding.levels,
                encoding.produced,
            )
        columns.update(produced)
        encodings[variable] = encoding

    dataset = PreparedDataset(
        columns=columns,
        encodings=encodings,
        row_count=len(kept_rows),
        dropped_rows=dropped,
        drop_reasons=drop_reasons,
        source_sql=trace.final_sql,
    )
    return dataset, trace


# --- configuration selection ----------------------------------------------------


def _render_menu() -> str:
    lines = ["task:", "  effect_estimation: estimate the average treatment effect"]
    lines.append("identification:")
    lines.append("  backdoor: adjust for a set blocking all backdoor paths")
    lines.append("estimation:")
    lines.extend(f"  {name}: {desc}" for name, desc in _METHOD_MENU)
    lines.append("refutation:")
    lines.extend(f"  {name}: {desc}" for name, desc in _REFUTER_MENU)
    return "\n".join(lines)


def _render_sample(dataset: PreparedDataset) -> str:
    names = list(dataset.columns)
    rows = dataset.head(SAMPLE_ROWS)
    header = ", ".join(names)
    body = "\n".join(", ".join(f"{r[n]:g}" for n in names) for r in rows)
    return f"{header}\n{body}"


def _treatment_is_binary(dataset: PreparedDataset, treatment: str) -> bool:
    return _is_binary(dataset.columns[treatment])


def select_config(
    query: CausalQuery,
    dataset: PreparedDataset,
    provider: Provider,
    seed: int = 0,
) -> tuple[CausalModelSpec, list[str]]:
    """Pick task/identification/estimation/refutation from the fixed menu.

    Never raises: unparseable replies fall back to backdoor + linear
    regression + placebo refutation, and structurally invalid choices are
    repaired deterministically. Repairs and fallbacks are returned as notes."""
    binary = _treatment_is_binary(dataset, query.treatment)
    request = ChatRequest(
        system_text=_SELECT_SYSTEM,
        user_text=query.question,
        context_blocks=(
            ("variables", f"treatment: {query.treatment} "
                          f"({'binary' if binary else 'non-binary'}); "
                          f"outcome: {query.outcome}; "
                          f"graph nodes: {', '.join(sorted(query.graph.nodes))}"),
            ("option menu", _render_menu()),
            ("data sample", _render_sample(dataset)),
        ),
        output_schema_hint=_SELECT_HINT,
    )
    notes: list[str] = []
    try:
        response = provider.chat(request)
        parsed = response.parsed if isinstance(response.parsed, dict) else {}
    except ParseFailure:
        notes.append(
            "configuration fallback: provider reply unusable; "
            "using backdoor + linear_regression + placebo_treatment"
        )
        spec = CausalModelSpec(
            graph=query.graph,
            treatment=query.treatment,
            outcome=query.outcome,
            estimation=LINEAR,
            refutation=PLACEBO,
            seed=seed,
        )
        return spec, notes

    estimation = str(parsed.get("estimation", ""))
    if estimation not in ESTIMATION_METHODS:
        notes.append(f"repair: unknown estimation {estimation!r} -> {LINEAR}")
        estimation = LINEAR
    if estimation in PROPENSITY_METHODS and not binary:
        notes.append(
            f"repair: {estimation} needs a binary treatment; using {LINEAR}"
        )
        estimation = LINEAR

    raw_refutation = parsed.get("refutation")
    refutation: Optional[str]
    if raw_refutation in (None, "", "none"):
        refutation = None
    elif raw_refutation in REFUTATION_TECHNIQUES:
        refutation = str(raw_refutation)
    else:
        notes.append(f"repair: unknown refutation {raw_refutation!r} -> {PLACEBO}")
        refutation = PLACEBO

    task = str(parsed.get("task", EFFECT_ESTIMATION))
    if task != EFFECT_ESTIMATION:
        notes.append(f"repair: unsupported task {task!r} -> {EFFECT_ESTIMATION}")
    identification = str(parsed.get("identification", BACKDOOR))
    if identification != BACKDOOR:
        notes.append(f"repair: unsupported identification {identification!r} -> {BACKDOOR}")

    spec = CausalModelSpec(
        graph=query.graph,
        treatment=query.treatment,
        outcome=query.outcome,
        estimation=estimation,
        refutation=refutation,
        seed=seed,
    )
    return spec, notes


# --- model implementation -------------------------------------------------------


def expanded_adjustment(dataset: PreparedDataset, names) -> list[str]:
    """Graph-variable adjustment set -> concrete design columns (one-hot aware)."""
    out: list[str] = []
    for name in sorted(names):
        out.extend(dataset.design_names(name))
    return out


def implement_model(
    spec: CausalModelSpec,
    dataset: PreparedDataset,
    query: CausalQuery,
) -> tuple[Estimand, EffectEstimate, Optional[RefutationResult]]:
    validate_model_spec(spec)
    estimand = identify_backdoor(spec.graph, spec.treatment, spec.outcome)
    adjustment = expanded_adjustment(dataset, estimand.adjustment_set)
    estimate = estimate_effect(
        dataset.columns,
        spec.treatment,
        spec.outcome,
        adjustment,
        spec.estimation,
        seed=spec.seed,
    )
    refutation = None
    if spec.refutation is not None:
        refutation = refute_estimate(
            dataset.columns,
            spec.treatment,
            spec.outcome,
            adjustment,
            spec.estimation,
            estimate,
            spec.refutation,
            seed=spec.seed,
        )
    return estimand, estimate, refutation


# --- interpretation --------------------------------------------------------------


_SENTENCE_RE = re.compile(r"(?<=[.!?])\s+")


def split_sentences(text: str) -> list[str]:
    parts = _SENTENCE_RE.split(text.strip())
    return [p for p in parts if re.search(r"\w", p)]


def _interpret_blocks(
    estimate: EffectEstimate,
    estimand: Estimand,
    refutation: Optional[RefutationResult],
    query: CausalQuery,
) -> tuple[tuple[str, str], ...]:
    blocks = [
        (
            "estimate",
            f"ATE = {estimate.ate:.6g}, {int(estimate.ci_level * 100)}% CI "
            f"[{estimate.ci_low:.6g}, {estimate.ci_high:.6g}], "
            f"n = {estimate.n_used}, method = {estimate.method}",
        ),
        (
            "variables",
            f"treatment: {query.treatment}; outcome: {query.outcome}; "
            f"adjusted for: "
            f"{', '.join(sorted(estimand.adjustment_set)) or '(nothing)'}",
        ),
    ]
    if refutation is not None:
        blocks.append(
            (
                "robustness check",
                f"{refutation.technique}: {refutation.verdict} ({refutation.detail})",
            )
        )
    if estimate.covers(0.0):
        blocks.append(
            (
                "significance",
                "the confidence interval includes zero: the effect is not "
                "statistically significant and the summary must say so",
            )
        )
    return tuple(blocks)


def interpret(
    estimate: EffectEstimate,
    estimand: Estimand,
    refutation: Optional[RefutationResult],
    query: CausalQuery,
    provider: Provider,
) -> tuple[str, list[str]]:
    """3-6 sentence summary; one regeneration for out-of-bound drafts, then
    truncate (too long) or accept with a note (too short)."""
    blocks = _interpret_blocks(estimate, estimand, refutation, query)
    request = ChatRequest(
        system_text=_INTERPRET_SYSTEM,
        user_text=query.question,
        context_blocks=blocks,
    )
    notes: list[str] = []
    text = provider.chat(request).text.strip()
    count = len(split_sentences(text))
    if not MIN_SENTENCES <= count <= MAX_SENTENCES:
        notes.append(f"interpretation draft had {count} sentences; regenerating")
        retry = ChatRequest(
            system_text=_INTERPRET_SYSTEM,
            user_text=query.question
            + f"\n\nThe previous draft had {count} sentences; write between "
            f"{MIN_SENTENCES} and {MAX_SENTENCES}.",
            context_blocks=blocks,
        )
        text = provider.chat(retry).text.strip()
        sentences = split_sentences(text)
        if len(sentences) > MAX_SENTENCES:
            text = " ".join(sentences[:MAX_SENTENCES])
            notes.append(f"truncated from {len(sentences)} to {MAX_SENTENCES} sentences")
        elif len(sentences) < MIN_SENTENCES:
            notes.append(f"accepted short interpretation ({len(sentences)} sentences)")
    return text, notes


# --- pipeline ---------------------------------------------------------------------


def analyze(
    query: CausalQuery,
    catalog: SchemaCatalog,
    connection: sqlite3.Connection,
    provider: Provider,
    seed: int = 0,
    injected_sql: Optional[str] = None,
    normalize: bool = False,
    spec_override: Optional[CausalModelSpec] = None,
) -> AnalysisReport:
    """prepare_data -> select_config -> implement_model -> interpret.

    A stage failure ends the run with status "failed:<stage>" and whatever
    was produced so far; the trace always records how far the run got.
    spec_override skips configuration selection (used for feedback re-runs)."""
    report = AnalysisReport(query=query)
    stage = "prepare_data"
    try:
        dataset, sql_trace = prepare_data(
            query, catalog, connection, provider,
            injected_sql=injected_sql, normalize=normalize,
        )
        report.dataset = dataset
        report.sql_trace = sql_trace
        report.log(
            stage,
            rows=dataset.row_count,
            dropped=dataset.dropped_rows,
            encodings={v: e.encoding for v, e in dataset.encodings.items()},
            sql=dataset.source_sql,
        )

        stage = "select_config"
        if spec_override is not None:
            spec = spec_override
            report.log(stage, estimation=spec.estimation,
                       refutation=spec.refutation, notes=["spec supplied by caller"])
        else:
            spec, notes = select_config(query, dataset, provider, seed=seed)
            report.log(stage, estimation=spec.estimation,
                       refutation=spec.refutation, notes=notes)
        report.spec = spec

        stage = "implement_model"
        estimand, estimate, refutation = implement_model(spec, dataset, query)
        report.estimand = estimand
        report.estimate = estimate
        report.refutation = refutation
        report.log(
            "identify",
            adjustment=sorted(estimand.adjustment_set),
            expression=estimand.expression_text,
        )
        report.log(
            "estimate",
            ate=estimate.ate,
            ci=[estimate.ci_low, estimate.ci_high],
            n=estimate.n_used,
            method=estimate.method,
        )
        if refutation is not None:
            report.log(
                "refute",
                technique=refutation.technique,
                verdict=refutation.verdict,
                refuted_estimate=refutation.refuted_estimate,
            )

        stage = "interpret"
        text, notes = interpret(estimate, estimand, refutation, query, provider)
        report.interpretation = text
        report.log(stage, sentences=len(split_sentences(text)), notes=notes)

        report.status = "complete"
        report.log("final", status=report.status)
        return report
    except OrcaError as exc:
        report.status = f"failed:{stage}"
        report.error = f"{type(exc).__name__}: {exc}"
        if isinstance(exc, RetrievalFailed) and exc.trace is not None:
            report.sql_trace = exc.trace
        report.log("error", failed_stage=stage, kind=type(exc).__name__,
                   message=str(exc))
        report.log("final", status=report.status)
        return report


def report_to_dict(report: AnalysisReport) -> dict:
    """JSON-ready structural dump of everything but the raw data columns."""
    est = report.estimate
    return {
        "question": report.query.question,
        "treatment": report.query.treatment,
        "outcome": report.query.outcome,
        "status": report.status,
        "spec": None
        if report.spec is None
        else {
            "task": report.spec.task,
            "identification": report.spec.identification,
            "estimation": report.spec.estimation,
            "refutation": report.spec.refutation,
            "seed": report.spec.seed,
        },
        "estimand": None
        if report.estimand is None
        else {
            "kind": report.estimand.kind,
            "adjustment_set": sorted(report.estimand.adjustment_set),
            "expression": report.estimand.expression_text,
        },
        "estimate": None
        if est is None
        else {
            "ate": est.ate,
            "ci_low": est.ci_low,
            "ci_high": est.ci_high,
            "n_used": est.n_used,
            "method": est.method,
            "ci_level": est.ci_level,
        },
        "refutation": None
        if report.refutation is None
        else {
            "technique": report.refutation.technique,
            "refuted_estimate": report.refutation.refuted_estimate,
            "verdict": report.refutation.verdict,
            "detail": report.refutation.detail,
        },
        "interpretation": report.interpretation,
        "rows_used": None if report.dataset is None else report.dataset.row_count,
        "dropped_rows": None if report.dataset is None else report.dataset.dropped_rows,
        "error": report.error,
        "trace": report.trace,
    }
