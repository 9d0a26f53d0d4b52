"""Classifies user queries as data vs causal work and picks the data sub-task."""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Optional

from .errors import EmptyQuery, NoPendingClarification, ParseFailure
from .providers import ChatRequest, Provider

KIND_DATA = "data"
KIND_CAUSAL = "causal"
DATA_SUB_INTENTS = ("explore_table", "recommend_tables", "text2sql")
CAUSAL_SUB_INTENT = "effect_estimation"
FALLBACK_CONFIDENCE = 0.5

_CAUSAL_WORDS = re.compile(
    r"\b(effects?|impacts?|causes?|caused|causal|causally|treatments?)\b", re.I
)
_RECOMMEND_WORDS = re.compile(r"\b(which tables?|recommend\w*)\b", re.I)
_EXPLORE_WORDS = re.compile(r"\b(tables?|schemas?|describe|columns?)\b", re.I)

_SYSTEM = """\
You route analytics questions to the right agent. Classify the question as
either a "data" task or a "causal" task. Data tasks have three sub-intents:
- explore_table: describe or profile one table
- recommend_tables: pick which tables/columns fit an analytical objective
- text2sql: answer a concrete question by querying the data
Causal tasks ask for the effect of an intervention (sub_intent
"effect_estimation"). If the question is too ambiguous to classify, set
clarification_needed to the question you would ask the user."""

_SCHEMA_HINT = (
    '{"kind": "data|causal", "sub_intent": "explore_table|recommend_tables|'
    'text2sql|effect_estimation", "confidence": 0.0, '
    '"clarification_needed": null}'
)


@dataclass(frozen=True)
class RoutedQuery:
    raw_text: str
    kind: str
    sub_intent: str
    confidence: float
    clarification_needed: Optional[str] = None


def _fallback(raw_text: str) -> RoutedQuery:
    if _CAUSAL_WORDS.search(raw_text):
        kind, sub = KIND_CAUSAL, CAUSAL_SUB_INTENT
    elif _RECOMMEND_WORDS.search(raw_text):
        kind, sub = KIND_DATA, "recommend_tables"
    elif _EXPLORE_WORDS.search(raw_text):
        kind, sub = KIND_DATA, "explore_table"
    else:
        kind, sub = KIND_DATA, "text2sql"
    return RoutedQuery(
        raw_text=raw_text, kind=kind, sub_intent=sub,
        confidence=FALLBACK_CONFIDENCE,
    )


def _from_verdict(raw_text: str, verdict: dict) -> Optional[RoutedQuery]:
    kind = verdict.get("kind")
    clarification = verdict.get("clarification_needed") or None
    try:
        confidence = min(max(float(verdict.get("confidence", 0.5)), 0.0), 1.0)
    except (TypeError, ValueError):
        confidence = FALLBACK_CONFIDENCE
    if kind == KIND_CAUSAL:
        return RoutedQuery(
            raw_text=raw_text, kind=KIND_CAUSAL, sub_intent=CAUSAL_SUB_INTENT,
            confidence=confidence, clarification_needed=clarification,
        )
    if kind == KIND_DATA and verdict.get("sub_intent") in DATA_SUB_INTENTS:
        return RoutedQuery(
            raw_text=raw_text, kind=KIND_DATA, sub_intent=verdict["sub_intent"],
            confidence=confidence, clarification_needed=clarification,
        )
    return None  # ambiguous or malformed verdict


def route(raw_text: str, catalog_summary: str, provider: Provider) -> RoutedQuery:
    """Classify via the provider; fall back to keyword rules (confidence 0.5)."""
    if not raw_text.strip():
        raise EmptyQuery("cannot route an empty query")
    request = ChatRequest(
        system_text=_SYSTEM,
        user_text=f"Classify this question:\n{raw_text}",
        context_blocks=(("available tables", catalog_summary or "(no catalog)"),),
        output_schema_hint=_SCHEMA_HINT,
    )
    try:
        response = provider.chat(request)
    except ParseFailure:
        return _fallback(raw_text)
    routed = None
    if isinstance(response.parsed, dict):
        routed = _from_verdict(raw_text, response.parsed)
    return routed if routed is not None else _fallback(raw_text)


def request_clarification(
    routed: RoutedQuery,
    user_reply: str,
    catalog_summary: str,
    provider: Provider,
) -> RoutedQuery:
    """Re-route with the user's reply appended to the original text."""
    if routed.clarification_needed is None:
        raise NoPendingClarification("no clarification is pending for this query")
    if not user_reply.strip():
        return replace(routed)  # re-ask: same question, still pending
    combined = f"{routed.raw_text}\n\nClarification from user: {user_reply}"
    return route(combined, catalog_summary, provider)
