"""Event-sourced analysis sessions.

A session is an append-only log of pipeline events persisted as one JSON-lines
file; all recoverable session state (history, pending waits, artifacts) is a
pure function of that log, so a crashed process resumes by replaying it.
Sequence numbers are gapless per session and each request chain ends in
exactly one terminal event.
"""

from __future__ import annotations

import json
import re
import sqlite3
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from . import catalog as catalog_mod
from .analyzer import (
    AnalysisReport,
    CausalQuery,
    implement_model,
    interpret,
    analyze,
    report_to_dict,
    split_sentences,
)
from .engine import (
    CausalModelSpec,
    EffectEstimate,
    Estimand,
    RefutationResult,
    parse_graph_text,
)
from .errors import (
    NothingToRefine,
    OrcaError,
    SessionBusy,
    UnknownArtifact,
    UnknownDatabaseId,
    UnknownSession,
)
from .explorer import explore
from .providers import Provider
from .recommender import recommend
from .router import KIND_CAUSAL, RoutedQuery, request_clarification, route
from .text2sql import run_pipeline, trace_to_dict

PREVIEW_ROWS = 50

STAGE_CREATED = "created"
STAGE_ROUTED = "routed"
STAGE_AWAITING = "awaiting"
STAGE_RESUMED = "resumed"
STAGE_ARTIFACT = "artifact"
STAGE_FEEDBACK = "feedback"
STAGE_ERROR = "error"
STAGE_DONE = "done"
STAGE_CAUSAL_QUERY = "causal_query"

_METHOD_ALIASES = {
    "linear_regression": ("linear_regression", "linear regression", "ols",
                          "least squares"),
    "propensity_matching": ("propensity_matching", "propensity matching", "matching"),
    "propensity_stratification": ("propensity_stratification",
                                  "propensity stratification", "stratification"),
    "propensity_weighting": ("propensity_weighting", "propensity weighting",
                             "weighting", "inverse propensity", "ipw"),
}

_REFUTER_ALIASES = {
    "placebo_treatment": ("placebo_treatment", "placebo treatment", "placebo"),
    "random_common_cause": ("random_common_cause", "random common cause",
                            "common cause"),
    "data_subset": ("data_subset", "data subset", "subset"),
}


@dataclass(frozen=True)
class PipelineEvent:
    session_id: str
    sequence: int
    stage: str
    payload: dict
    terminal: bool = False

    def to_json(self) -> str:
        return json.dumps(
            {
                "session_id": self.session_id,
                "sequence": self.sequence,
                "stage": self.stage,
                "payload": self.payload,
                "terminal": self.terminal,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, line: str) -> "PipelineEvent":
        raw = json.loads(line)
        return cls(
            session_id=raw["session_id"],
            sequence=raw["sequence"],
            stage=raw["stage"],
            payload=raw["payload"],
            terminal=raw["terminal"],
        )


@dataclass(frozen=True)
class Artifact:
    artifact_id: str
    kind: str  # erd | trace | report | dataset_preview
    body: object


@dataclass
class Session:
    session_id: str
    database_id: str
    events: list[PipelineEvent] = field(default_factory=list)
    pending: Optional[dict] = None
    artifacts: dict[str, Artifact] = field(default_factory=dict)
    last_causal: Optional[dict] = None
    # transient (not recovered from the log): lock and fast-path cache
    busy: bool = False
    cache: dict = field(default_factory=dict)

    @property
    def last_sequence(self) -> int:
        return self.events[-1].sequence if self.events else 0

    def next_artifact_id(self) -> str:
        return f"a-{len(self.artifacts) + 1:03d}"

    def latest_artifact(self, kind: str) -> Optional[Artifact]:
        for artifact in reversed(list(self.artifacts.values())):
            if artifact.kind == kind:
                return artifact
        return None


def parse_feedback_directive(text: str) -> Optional[dict]:
    """The deterministic override grammar, applied before any provider call.

    Recognized: "use <estimation method>", "refute with <technique>",
    "no refutation", "bind <variable> to <table>.<column>". Anything else is
    forwarded to the current stage's prompt as extra context."""
    low = " ".join(text.strip().lower().split())
    m = re.fullmatch(r"bind\s+(\w+)\s+to\s+(\w+)\.(\w+)", low)
    if m:
        return {
            "action": "bind",
            "variable": m.group(1),
            "table": m.group(2),
            "column": m.group(3),
        }
    if low in ("no refutation", "skip refutation", "refute with none"):
        return {"action": "no_refutation"}
    m = re.fullmatch(r"refute with\s+(.+?)\.?", low)
    if m:
        wanted = m.group(1)
        for technique, aliases in _REFUTER_ALIASES.items():
            if wanted in aliases:
                return {"action": "refute", "technique": technique}
        return None
    m = re.fullmatch(r"use\s+(.+?)(?:\s+instead)?\.?", low)
    if m:
        wanted = m.group(1)
        for method, aliases in _METHOD_ALIASES.items():
            if wanted in aliases:
                return {"action": "use", "estimation": method}
        return None
    return None


def _find_mentioned_tables(text: str, catalog) -> list[str]:
    words = set(re.findall(r"[a-z_][a-z0-9_]*", text.lower()))
    return [t for t in catalog.table_names() if t.lower() in words]


class SessionManager:
    """Owns the registered databases, the provider, and every session log."""

    def __init__(self, state_dir: str | Path, provider: Provider, seed: int = 0):
        self.state_dir = Path(state_dir)
        self.provider = provider
        self.seed = seed
        self.databases: dict[str, dict] = {}
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._session_dir = self.state_dir / "sessions"
        self._session_dir.mkdir(parents=True, exist_ok=True)
        self._load_existing()

    # --- database registry ---

    def register_database(
        self,
        database_id: str,
        connection: sqlite3.Connection,
        catalog=None,
        embed: bool = True,
    ) -> None:
        if catalog is None:
            catalog = catalog_mod.snapshot(connection, database_id)
            if embed:
                catalog_mod.attach_embeddings(catalog, self.provider)
        self.databases[database_id] = {"connection": connection, "catalog": catalog}

    def _database(self, database_id: str) -> dict:
        if database_id not in self.databases:
            raise UnknownDatabaseId(f"no registered database {database_id!r}")
        return self.databases[database_id]

    # --- log persistence ---

    def _log_path(self, session_id: str) -> Path:
        return self._session_dir / f"{session_id}.jsonl"

    def _load_existing(self) -> None:
        for path in sorted(self._session_dir.glob("s-*.jsonl")):
            session = self._replay(path)
            if session is not None:
                self._sessions[session.session_id] = session

    @staticmethod
    def _replay(path: Path) -> Optional[Session]:
        lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
        if not lines:
            return None
        events = [PipelineEvent.from_json(ln) for ln in lines]
        first = events[0]
        session = Session(
            session_id=first.session_id,
            database_id=first.payload.get("database_id", ""),
        )
        for event in events:
            session.events.append(event)
            if event.stage == STAGE_ARTIFACT:
                session.artifacts[event.payload["artifact_id"]] = Artifact(
                    artifact_id=event.payload["artifact_id"],
                    kind=event.payload["kind"],
                    body=event.payload["body"],
                )
            elif event.stage == STAGE_AWAITING:
                session.pending = event.payload.get("pending")
            elif event.stage == STAGE_RESUMED or event.terminal:
                session.pending = None
            if event.stage == STAGE_CAUSAL_QUERY:
                session.last_causal = dict(event.payload)
        return session

    def _emit(
        self, session: Session, stage: str, payload: dict, terminal: bool = False
    ) -> PipelineEvent:
        event = PipelineEvent(
            session_id=session.session_id,
            sequence=session.last_sequence + 1,
            stage=stage,
            payload=payload,
            terminal=terminal,
        )
        session.events.append(event)
        with open(self._log_path(session.session_id), "a") as handle:
            handle.write(event.to_json() + "\n")
        return event

    def _add_artifact(self, session: Session, kind: str, body) -> Artifact:
        # canonicalize to JSON types so in-memory state == replayed state
        body = json.loads(json.dumps(body))
        artifact = Artifact(
            artifact_id=session.next_artifact_id(), kind=kind, body=body
        )
        session.artifacts[artifact.artifact_id] = artifact
        self._emit(
            session,
            STAGE_ARTIFACT,
            {"artifact_id": artifact.artifact_id, "kind": kind, "body": body},
        )
        return artifact

    # --- public API ---

    def create_session(self, database_id: str) -> Session:
        self._database(database_id)
        with self._lock:
            session_id = f"s-{len(self._sessions) + 1:06d}"
            while session_id in self._sessions:
                session_id = f"s-{int(session_id.split('-')[1]) + 1:06d}"
            session = Session(session_id=session_id, database_id=database_id)
            self._sessions[session_id] = session
        self._emit(session, STAGE_CREATED, {"database_id": database_id})
        return session

    def get_session(self, session_id: str) -> Session:
        if session_id not in self._sessions:
            raise UnknownSession(f"no session {session_id!r}")
        return self._sessions[session_id]

    def events_after(self, session_id: str, after: int = 0) -> list[PipelineEvent]:
        session = self.get_session(session_id)
        return [e for e in session.events if e.sequence > after]

    def get_artifact(self, session_id: str, artifact_id: str) -> Artifact:
        session = self.get_session(session_id)
        if artifact_id not in session.artifacts:
            raise UnknownArtifact(f"no artifact {artifact_id!r} in {session_id!r}")
        return session.artifacts[artifact_id]

    def submit_query(
        self,
        session_id: str,
        text: str,
        graph_text: Optional[str] = None,
        bindings: Optional[dict] = None,
        treatment: Optional[str] = None,
        outcome: Optional[str] = None,
        injected_sql: Optional[str] = None,
    ) -> list[PipelineEvent]:
        session = self.get_session(session_id)
        if session.busy or session.pending is not None:
            raise SessionBusy(
                f"session {session_id!r} is "
                + ("processing a request" if session.busy else "awaiting a reply")
            )
        session.busy = True
        start = len(session.events)
        try:
            self._dispatch_query(
                session,
                text,
                graph_text=graph_text,
                bindings=bindings,
                treatment=treatment,
                outcome=outcome,
                injected_sql=injected_sql,
            )
        finally:
            session.busy = False
        return session.events[start:]

    def submit_feedback(self, session_id: str, text: str) -> list[PipelineEvent]:
        session = self.get_session(session_id)
        if session.busy:
            raise SessionBusy(f"session {session_id!r} is processing a request")
        session.busy = True
        start = len(session.events)
        try:
            if session.pending is not None:
                self._resume_pending(session, text)
            else:
                self._refine_report(session, text)
        finally:
            session.busy = False
        return session.events[start:]

    # --- query dispatch ---

    def _dispatch_query(self, session: Session, text: str, **causal_kwargs) -> None:
        db = self._database(session.database_id)
        catalog = db["catalog"]
        try:
            routed = route(text, catalog.summary_text(), self.provider)
        except OrcaError:
            raise  # EmptyQuery etc.: nothing has been emitted yet
        self._emit(
            session,
            STAGE_ROUTED,
            {
                "kind": routed.kind,
                "sub_intent": routed.sub_intent,
                "confidence": routed.confidence,
            },
        )
        if routed.clarification_needed is not None:
            pending = {
                "kind": "router",
                "raw_text": routed.raw_text,
                "routed_kind": routed.kind,
                "sub_intent": routed.sub_intent,
                "confidence": routed.confidence,
                "question": routed.clarification_needed,
                "causal_kwargs": _jsonable_kwargs(causal_kwargs),
            }
            session.pending = pending
            self._emit(
                session,
                STAGE_AWAITING,
                {"awaiting": "clarification",
                 "question": routed.clarification_needed,
                 "pending": pending},
            )
            return
        self._run_intent(session, routed, text, **causal_kwargs)

    def _run_intent(
        self, session: Session, routed: RoutedQuery, text: str, **causal_kwargs
    ) -> None:
        try:
            if routed.kind == KIND_CAUSAL:
                self._run_causal(session, text, **causal_kwargs)
            elif routed.sub_intent == "explore_table":
                self._run_explore(session, text)
            elif routed.sub_intent == "recommend_tables":
                self._run_recommend(session, text)
            else:
                self._run_sql(session, text)
        except OrcaError as exc:
            self._emit(
                session,
                STAGE_ERROR,
                {"kind": type(exc).__name__, "message": str(exc)},
            )
            self._emit(session, STAGE_DONE, {"status": "error"}, terminal=True)

    def _run_explore(self, session: Session, text: str) -> None:
        db = self._database(session.database_id)
        catalog = db["catalog"]
        mentioned = _find_mentioned_tables(text, catalog)
        if len(mentioned) != 1:
            question = (
                "Which table should I explore? Candidates: "
                + (", ".join(mentioned) if mentioned else ", ".join(catalog.table_names()))
            )
            pending = {"kind": "explore", "raw_text": text, "question": question}
            session.pending = pending
            self._emit(
                session,
                STAGE_AWAITING,
                {"awaiting": "clarification", "question": question,
                 "pending": pending},
            )
            return
        overview = explore(mentioned[0], catalog, self.provider)
        self._emit(
            session,
            "overview",
            {
                "table": overview.table,
                "description": overview.description,
                "anomalies": [
                    {"column": a.column, "kind": a.kind, "evidence": a.evidence}
                    for a in overview.anomalies
                ],
                "suggested_analyses": list(overview.suggested_analyses),
                "related_tables": [t for t, _ in overview.related_tables],
            },
        )
        self._emit(session, STAGE_DONE, {"status": "ok"}, terminal=True)

    def _run_recommend(self, session: Session, text: str) -> None:
        db = self._database(session.database_id)
        recommendation = recommend(text, db["catalog"], self.provider)
        self._emit(
            session,
            "recommendation",
            {
                "objective": recommendation.objective,
                "tables": [
                    {"table": t, "reason": r} for t, r in recommendation.tables
                ],
                "key_columns": recommendation.key_columns,
            },
        )
        self._add_artifact(session, "erd", recommendation.erd_doc)
        self._emit(session, STAGE_DONE, {"status": "ok"}, terminal=True)

    def _run_sql(self, session: Session, text: str) -> None:
        db = self._database(session.database_id)
        trace = run_pipeline(text, db["catalog"], db["connection"], self.provider)
        for event in trace.events:
            if event.get("stage") == "final":
                continue
            payload = {k: v for k, v in event.items() if k != "stage"}
            self._emit(session, f"sql_{event['stage']}", payload)
        self._add_artifact(session, "trace", trace_to_dict(trace))
        if trace.result_preview is not None:
            self._emit(
                session,
                "result",
                {
                    "columns": trace.result_preview.columns,
                    "rows": trace.result_preview.rows,
                    "sql": trace.final_sql,
                },
            )
        self._emit(session, STAGE_DONE, {"status": trace.status}, terminal=True)

    def _run_causal(
        self,
        session: Session,
        text: str,
        graph_text: Optional[str] = None,
        bindings: Optional[dict] = None,
        treatment: Optional[str] = None,
        outcome: Optional[str] = None,
        injected_sql: Optional[str] = None,
        spec_override: Optional[CausalModelSpec] = None,
    ) -> None:
        if not (graph_text and bindings and treatment and outcome):
            self._emit(
                session,
                STAGE_ERROR,
                {
                    "kind": "MissingCausalSpec",
                    "message": (
                        "causal analysis needs graph_text, bindings, treatment, "
                        "and outcome alongside the question"
                    ),
                },
            )
            self._emit(session, STAGE_DONE, {"status": "error"}, terminal=True)
            return
        query = CausalQuery(
            raw_text=text,
            treatment=treatment,
            outcome=outcome,
            graph=parse_graph_text(graph_text),
            variable_bindings={k: tuple(v) for k, v in bindings.items()},
            effect_question=text,
        )
        self._emit(
            session,
            STAGE_CAUSAL_QUERY,
            {
                "text": text,
                "graph_text": graph_text,
                "bindings": {k: list(v) for k, v in bindings.items()},
                "treatment": treatment,
                "outcome": outcome,
                "injected_sql": injected_sql,
            },
        )
        session.last_causal = dict(session.events[-1].payload)
        db = self._database(session.database_id)
        report = analyze(
            query,
            db["catalog"],
            db["connection"],
            self.provider,
            seed=self.seed,
            injected_sql=injected_sql,
            spec_override=spec_override,
        )
        self._finish_causal(session, report)

    def _finish_causal(self, session: Session, report: AnalysisReport) -> None:
        for event in report.trace:
            if event.get("stage") == "final":
                continue
            payload = {k: v for k, v in event.items() if k != "stage"}
            self._emit(session, event["stage"], payload)
        if report.sql_trace is not None:
            self._add_artifact(session, "trace", trace_to_dict(report.sql_trace))
        if report.dataset is not None:
            names = list(report.dataset.columns)
            rows = [
                [row[name] for name in names]
                for row in report.dataset.head(PREVIEW_ROWS)
            ]
            self._add_artifact(
                session, "dataset_preview", {"columns": names, "rows": rows}
            )
        self._add_artifact(session, "report", report_to_dict(report))
        if report.status == "complete":
            session.cache = {
                "dataset": report.dataset,
                "query": report.query,
                "spec": report.spec,
                "estimate": report.estimate,
                "estimand": report.estimand,
                "refutation": report.refutation,
            }
        self._emit(
            session,
            STAGE_DONE,
            {
                "status": report.status,
                "ate": None if report.estimate is None else report.estimate.ate,
                "interpretation": report.interpretation,
            },
            terminal=True,
        )

    # --- feedback ---

    def _resume_pending(self, session: Session, text: str) -> None:
        pending = session.pending or {}
        db = self._database(session.database_id)
        catalog = db["catalog"]
        session.pending = None
        self._emit(session, STAGE_RESUMED, {"reply": text, "pending": pending})
        if pending.get("kind") == "router":
            routed = RoutedQuery(
                raw_text=pending["raw_text"],
                kind=pending.get("routed_kind", "data"),
                sub_intent=pending.get("sub_intent", "text2sql"),
                confidence=pending.get("confidence", 0.0),
                clarification_needed=pending.get("question", ""),
            )
            rerouted = request_clarification(
                routed, text, catalog.summary_text(), self.provider
            )
            self._emit(
                session,
                STAGE_ROUTED,
                {
                    "kind": rerouted.kind,
                    "sub_intent": rerouted.sub_intent,
                    "confidence": rerouted.confidence,
                },
            )
            if rerouted.clarification_needed is not None:
                repending = dict(pending)
                repending["raw_text"] = rerouted.raw_text
                repending["question"] = rerouted.clarification_needed
                session.pending = repending
                self._emit(
                    session,
                    STAGE_AWAITING,
                    {"awaiting": "clarification",
                     "question": rerouted.clarification_needed,
                     "pending": repending},
                )
                return
            kwargs = pending.get("causal_kwargs") or {}
            self._run_intent(session, rerouted, rerouted.raw_text, **kwargs)
        elif pending.get("kind") == "explore":
            combined = f"{pending['raw_text']}\n{text}"
            self._run_explore(session, combined)
        else:
            self._emit(
                session,
                STAGE_ERROR,
                {"kind": "UnknownPending", "message": str(pending)},
            )
            self._emit(session, STAGE_DONE, {"status": "error"}, terminal=True)

    def _refine_report(self, session: Session, text: str) -> None:
        report_artifact = session.latest_artifact("report")
        if session.last_causal is None or report_artifact is None:
            raise NothingToRefine(
                "no pending clarification and no completed report to refine"
            )
        directive = parse_feedback_directive(text)
        self._emit(
            session,
            STAGE_FEEDBACK,
            {"text": text, "action": (directive or {}).get("action", "context")},
        )
        if directive is None:
            self._reinterpret(session, text, report_artifact)
            return
        if directive["action"] == "bind":
            params = dict(session.last_causal)
            bindings = {k: tuple(v) for k, v in params["bindings"].items()}
            bindings[directive["variable"]] = (
                directive["table"],
                directive["column"],
            )
            self._run_causal(
                session,
                params["text"],
                graph_text=params["graph_text"],
                bindings=bindings,
                treatment=params["treatment"],
                outcome=params["outcome"],
                injected_sql=params.get("injected_sql"),
            )
            return
        spec = self._current_spec(session, report_artifact)
        if directive["action"] == "use":
            new_spec = replace(spec, estimation=directive["estimation"])
        elif directive["action"] == "refute":
            new_spec = replace(spec, refutation=directive["technique"])
        else:  # no_refutation
            new_spec = replace(spec, refutation=None)
        self._rerun_model(session, new_spec)

    def _current_spec(self, session: Session, report_artifact: Artifact) -> CausalModelSpec:
        if session.cache.get("spec") is not None:
            return session.cache["spec"]
        body = report_artifact.body
        params = session.last_causal
        return CausalModelSpec(
            graph=parse_graph_text(params["graph_text"]),
            treatment=params["treatment"],
            outcome=params["outcome"],
            estimation=body["spec"]["estimation"],
            refutation=body["spec"]["refutation"],
            seed=body["spec"].get("seed", self.seed),
        )

    def _rerun_model(self, session: Session, spec: CausalModelSpec) -> None:
        """Estimation/refutation overrides re-run from implement_model when the
        prepared dataset is still in memory; after a restart the whole pipeline
        re-runs from retrieval (same seed, same statement)."""
        cache = session.cache
        if cache.get("dataset") is None:
            params = dict(session.last_causal)
            self._run_causal(
                session,
                params["text"],
                graph_text=params["graph_text"],
                bindings={k: tuple(v) for k, v in params["bindings"].items()},
                treatment=params["treatment"],
                outcome=params["outcome"],
                injected_sql=params.get("injected_sql"),
                spec_override=spec,
            )
            return
        query: CausalQuery = cache["query"]
        dataset = cache["dataset"]
        try:
            estimand, estimate, refutation = implement_model(spec, dataset, query)
            self._emit(
                session,
                "identify",
                {
                    "adjustment": sorted(estimand.adjustment_set),
                    "expression": estimand.expression_text,
                },
            )
            self._emit(
                session,
                "estimate",
                {
                    "ate": estimate.ate,
                    "ci": [estimate.ci_low, estimate.ci_high],
                    "n": estimate.n_used,
                    "method": estimate.method,
                },
            )
            if refutation is not None:
                self._emit(
                    session,
                    "refute",
                    {
                        "technique": refutation.technique,
                        "verdict": refutation.verdict,
                        "refuted_estimate": refutation.refuted_estimate,
                    },
                )
            text, notes = interpret(
                estimate, estimand, refutation, query, self.provider
            )
            self._emit(
                session,
                "interpret",
                {"sentences": len(split_sentences(text)), "notes": notes},
            )
        except OrcaError as exc:
            self._emit(
                session,
                STAGE_ERROR,
                {"kind": type(exc).__name__, "message": str(exc)},
            )
            self._emit(session, STAGE_DONE, {"status": "error"}, terminal=True)
            return
        report = AnalysisReport(
            query=query,
            status="complete",
            spec=spec,
            estimand=estimand,
            estimate=estimate,
            refutation=refutation,
            interpretation=text,
            dataset=dataset,
        )
        self._add_artifact(session, "report", report_to_dict(report))
        session.cache.update(
            {
                "spec": spec,
                "estimate": estimate,
                "estimand": estimand,
                "refutation": refutation,
            }
        )
        self._emit(
            session,
            STAGE_DONE,
            {"status": "complete", "ate": estimate.ate, "interpretation": text},
            terminal=True,
        )

    def _reinterpret(self, session: Session, text: str, report_artifact: Artifact) -> None:
        """Unrecognized feedback: forward it to the interpretation prompt."""
        estimate, estimand, refutation, query = self._estimation_objects(
            session, report_artifact
        )
        amended = replace(
            query,
            effect_question=(
                f"{query.question}\n\nAdditional context from the user: {text}"
            ),
        )
        new_text, notes = interpret(
            estimate, estimand, refutation, amended, self.provider
        )
        self._emit(
            session,
            "interpret",
            {"sentences": len(split_sentences(new_text)), "notes": notes},
        )
        body = dict(report_artifact.body)
        body["interpretation"] = new_text
        self._add_artifact(session, "report", body)
        self._emit(
            session,
            STAGE_DONE,
            {"status": "complete", "ate": body["estimate"]["ate"],
             "interpretation": new_text},
            terminal=True,
        )

    def _estimation_objects(self, session: Session, report_artifact: Artifact):
        cache = session.cache
        if cache.get("estimate") is not None:
            return (
                cache["estimate"],
                cache["estimand"],
                cache.get("refutation"),
                cache["query"],
            )
        body = report_artifact.body
        params = session.last_causal
        estimate = EffectEstimate(
            ate=body["estimate"]["ate"],
            ci_low=body["estimate"]["ci_low"],
            ci_high=body["estimate"]["ci_high"],
            n_used=body["estimate"]["n_used"],
            method=body["estimate"]["method"],
            ci_level=body["estimate"].get("ci_level", 0.95),
        )
        estimand = Estimand(
            kind=body["estimand"]["kind"],
            adjustment_set=frozenset(body["estimand"]["adjustment_set"]),
            expression_text=body["estimand"]["expression"],
        )
        refutation = None
        if body.get("refutation"):
            refutation = RefutationResult(
                technique=body["refutation"]["technique"],
                refuted_estimate=body["refutation"]["refuted_estimate"],
                verdict=body["refutation"]["verdict"],
                detail=body["refutation"]["detail"],
            )
        query = CausalQuery(
            raw_text=params["text"],
            treatment=params["treatment"],
            outcome=params["outcome"],
            graph=parse_graph_text(params["graph_text"]),
            variable_bindings={k: tuple(v) for k, v in params["bindings"].items()},
            effect_question=params["text"],
        )
        return estimate, estimand, refutation, query


def _jsonable_kwargs(kwargs: dict) -> dict:
    out = {}
    for key, value in kwargs.items():
        if value is None:
            continue
        if key == "bindings":
            out[key] = {k: list(v) for k, v in value.items()}
        else:
            out[key] = value
    return out
