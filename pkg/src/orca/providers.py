"""Uniform boundary for language-model and embedding calls.

All other modules talk to a :class:`Provider`; nothing else in the package
performs network I/O to model services. The scriptable mock is deterministic:
an identical script plus an identical call sequence reproduces identical
responses and embedding vectors bit-for-bit, which is what makes every
pipeline testable offline.
"""

from __future__ import annotations

import json
import os
import re
import threading
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional, Sequence

from .errors import ParseFailure, ProviderUnavailable, ScriptExhausted, ScriptMismatch

EMBEDDING_DIM = 64

_REPAIR_NOTE = (
    "The previous reply could not be parsed as structured output. "
    "Respond again with only a valid JSON value and no surrounding prose."
)


@dataclass(frozen=True)
class ChatRequest:
    """One chat call: system framing, labeled context blocks, user text."""

    system_text: str
    user_text: str
    context_blocks: tuple[tuple[str, str], ...] = ()
    output_schema_hint: Optional[str] = None
    temperature: float = 0.0

    def __post_init__(self):
        if not self.user_text:
            raise ValueError("user_text must be non-empty")
        labels = [label for label, _ in self.context_blocks]
        if len(labels) != len(set(labels)):
            raise ValueError("context block labels must be unique")
        if not 0.0 <= self.temperature <= 1.0:
            raise ValueError("temperature must lie in [0, 1]")

    def prompt_text(self) -> str:
        """Canonical rendering used both for matching and for real calls."""
        parts = []
        if self.system_text:
            parts.append(self.system_text)
        for label, body in self.context_blocks:
            parts.append(f"## {label}\n{body}")
        parts.append(self.user_text)
        return "\n\n".join(parts)


@dataclass(frozen=True)
class ChatResponse:
    text: str
    parsed: Optional[Any]
    provider_id: str
    latency_ms: int


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]
    model_id: str

    def __post_init__(self):
        if any(v != v or v in (float("inf"), float("-inf")) for v in self.values):
            raise ValueError("embedding values must be finite")


@dataclass
class MockScript:
    """Ordered response queue: each entry is (matcher, response_text).

    A matcher of ``"*"`` matches any prompt; otherwise plain substring match
    against the rendered prompt. Entries are consumed strictly front to back.
    """

    entries: list[tuple[str, str]] = field(default_factory=list)
    embedding_seed: int = 0

    @classmethod
    def from_file(cls, path: str | Path) -> "MockScript":
        return parse_script(Path(path).read_text())


def parse_script(text: str) -> MockScript:
    """Parse the line-oriented script format.

    ``SEED <int>`` sets the embedding seed, ``MATCH <substring>`` opens an
    entry, and ``RESPOND <<<`` starts a heredoc terminated by a ``>>>`` line.
    Lines starting with ``#`` outside heredocs are comments.
    """
    entries: list[tuple[str, str]] = []
    seed = 0
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        line = lines[i]
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            i += 1
            continue
        if stripped.upper().startswith("SEED "):
            seed = int(stripped[5:].strip())
            i += 1
            continue
        if not stripped.startswith("MATCH "):
            raise ValueError(f"script line {i + 1}: expected MATCH, got {stripped!r}")
        matcher = stripped[6:].strip()
        i += 1
        if i >= len(lines) or not lines[i].strip().startswith("RESPOND <<<"):
            raise ValueError(f"script line {i + 1}: expected 'RESPOND <<<' after MATCH")
        i += 1
        body: list[str] = []
        while i < len(lines) and lines[i].strip() != ">>>":
            body.append(lines[i])
            i += 1
        if i >= len(lines):
            raise ValueError("unterminated RESPOND heredoc")
        i += 1
        entries.append((matcher, "\n".join(body)))
    return MockScript(entries=entries, embedding_seed=seed)


# --- lenient structured-output parsing ---------------------------------------

_FENCE_RE = re.compile(r"```(?:json)?\s*\n(.*?)```", re.DOTALL)


def extract_structured(text: str) -> Any:
    """Pull the first JSON value out of model text, tolerating trailing prose.

    Tries fenced blocks first, then the first balanced object/array found by
    a quote-aware scan. Raises ValueError when nothing parses.
    """
    for match in _FENCE_RE.finditer(text):
        try:
            return json.loads(match.group(1))
        except json.JSONDecodeError:
            continue
    for start, opener, closer in _candidate_spans(text):
        depth = 0
        in_string = False
        escaped = False
        for pos in range(start, len(text)):
            ch = text[pos]
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_string = False
                continue
            if ch == '"':
                in_string = True
            elif ch == opener:
                depth += 1
            elif ch == closer:
                depth -= 1
                if depth == 0:
                    try:
                        return json.loads(text[start:pos + 1])
                    except json.JSONDecodeError:
                        break
        # fall through to the next candidate opener
    raise ValueError("no parseable JSON value in text")


def _candidate_spans(text: str):
    for i, ch in enumerate(text):
        if ch == "{":
            yield i, "{", "}"
        elif ch == "[":
            yield i, "[", "]"


# --- deterministic mock embeddings -------------------------------------------

_MASK = (1 << 64) - 1


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31), state


def _token_seed(token: str, seed: int) -> int:
    state = seed & _MASK
    for byte in token.encode("utf-8"):
        state, _ = _splitmix64(state ^ byte)
    return state


def _tokenize(text: str) -> list[str]:
    return re.findall(r"[a-z0-9]+", text.lower()) or [""]


def mock_embedding(text: str, seed: int) -> tuple[float, ...]:
    """Seeded hash embedding: sum of per-token pseudo-random unit patterns.

    Shared tokens contribute identical components, so lexical overlap raises
    cosine similarity; the result is L2-normalized.
    """
    acc = [0.0] * EMBEDDING_DIM
    for token in _tokenize(text):
        state = _token_seed(token, seed)
        for d in range(EMBEDDING_DIM):
            value, state = _splitmix64(state)
            acc[d] += value / float(1 << 63) - 1.0
    norm = sum(v * v for v in acc) ** 0.5
    if norm > 0:
        acc = [v / norm for v in acc]
    return tuple(acc)


# --- providers ----------------------------------------------------------------


class Provider:
    """Common chat/embed surface; subclasses implement the raw completion."""

    provider_id: str = "provider"
    embedding_dim: int = EMBEDDING_DIM

    def _complete(self, request: ChatRequest) -> tuple[str, int]:
        raise NotImplementedError

    def _embed_raw(self, texts: Sequence[str]) -> list[tuple[float, ...]]:
        raise NotImplementedError

    def chat(self, request: ChatRequest) -> ChatResponse:
        """Run one chat call; parse structured output with one repair retry."""
        text, latency = self._complete(request)
        parsed = None
        if request.output_schema_hint is not None:
            try:
                parsed = extract_structured(text)
            except ValueError:
                repaired = replace(
                    request, user_text=request.user_text + "\n\n" + _REPAIR_NOTE
                )
                text2, latency2 = self._complete(repaired)
                latency += latency2
                try:
                    parsed = extract_structured(text2)
                    text = text2
                except ValueError:
                    raise ParseFailure(
                        f"structured output unrecoverable for "
                        f"{request.output_schema_hint}: {text2[:200]!r}"
                    ) from None
        return ChatResponse(
            text=text, parsed=parsed, provider_id=self.provider_id, latency_ms=latency
        )

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        if not texts:
            raise ValueError("embed requires at least one text")
        vectors = self._embed_raw(list(texts))
        return [EmbeddingVector(values=v, model_id=self.provider_id) for v in vectors]


class MockProvider(Provider):
    """Deterministic scripted provider.

    The response queue is consumed front to back under a lock; each consumed
    entry must match the incoming prompt. Every call is recorded in
    ``transcript`` so tests can reconstruct exactly what each stage asked.
    """

    provider_id = "mock"

    def __init__(self, script: MockScript):
        self._queue = list(script.entries)
        self._seed = script.embedding_seed
        self._lock = threading.Lock()
        self.transcript: list[tuple[str, str]] = []

    @property
    def calls_made(self) -> int:
        return len(self.transcript)

    @property
    def remaining(self) -> int:
        return len(self._queue)

    def _complete(self, request: ChatRequest) -> tuple[str, int]:
        prompt = request.prompt_text()
        with self._lock:
            if not self._queue:
                raise ScriptExhausted(
                    f"mock script empty; unmatched prompt: {prompt[:160]!r}"
                )
            matcher, response = self._queue[0]
            if matcher != "*" and matcher not in prompt:
                raise ScriptMismatch(
                    f"next script entry expects {matcher!r} "
                    f"but prompt was: {prompt[:160]!r}"
                )
            self._queue.pop(0)
            self.transcript.append((prompt, response))
        return response, 0

    def _embed_raw(self, texts: Sequence[str]) -> list[tuple[float, ...]]:
        return [mock_embedding(t, self._seed) for t in texts]


class RealProvider(Provider):
    """OpenAI-compatible HTTP provider; 60 s timeout, 2 retries with backoff."""

    def __init__(
        self,
        model_id: str,
        api_key_env: str = "ORCA_API_KEY",
        embedding_model_id: str = "",
        base_url: str = "https://api.openai.com/v1",
        timeout_s: float = 60.0,
        retries: int = 2,
    ):
        self.provider_id = model_id
        self.model_id = model_id
        self.embedding_model_id = embedding_model_id or model_id
        self.base_url = base_url.rstrip("/")
        self.api_key_env = api_key_env
        self.timeout_s = timeout_s
        self.retries = retries

    def _headers(self) -> dict:
        key = os.environ.get(self.api_key_env, "")
        if not key:
            raise ProviderUnavailable(f"api key env var {self.api_key_env} not set")
        return {"Authorization": f"Bearer {key}"}

    def _post(self, path: str, payload: dict) -> dict:
        import httpx

        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                response = httpx.post(
                    f"{self.base_url}{path}",
                    json=payload,
                    headers=self._headers(),
                    timeout=self.timeout_s,
                )
                response.raise_for_status()
                return response.json()
            except ProviderUnavailable:
                raise
            except Exception as exc:  # network or HTTP error: retry with backoff
                last_error = exc
                if attempt < self.retries:
                    time.sleep(2.0 ** attempt)
        raise ProviderUnavailable(str(last_error))

    def _complete(self, request: ChatRequest) -> tuple[str, int]:
        started = time.monotonic()
        messages = []
        if request.system_text:
            messages.append({"role": "system", "content": request.system_text})
        body = request.prompt_text() if not request.system_text else "\n\n".join(
            [f"## {label}\n{text}" for label, text in request.context_blocks]
            + [request.user_text]
        )
        messages.append({"role": "user", "content": body})
        data = self._post(
            "/chat/completions",
            {
                "model": self.model_id,
                "messages": messages,
                "temperature": request.temperature,
            },
        )
        text = data["choices"][0]["message"]["content"]
        return text, int((time.monotonic() - started) * 1000)

    def _embed_raw(self, texts: Sequence[str]) -> list[tuple[float, ...]]:
        data = self._post(
            "/embeddings", {"model": self.embedding_model_id, "input": list(texts)}
        )
        rows = sorted(data["data"], key=lambda r: r["index"])
        vectors = [tuple(float(x) for x in row["embedding"]) for row in rows]
        if vectors:
            self.embedding_dim = len(vectors[0])
        return vectors


@dataclass
class ProviderConfig:
    """Configuration keys for building a provider."""

    kind: str = "mock"  # real | mock
    model_id: str = "gpt-4o-mini"
    api_key_env: str = "ORCA_API_KEY"
    embedding_model_id: str = ""
    mock_script_path: str = ""
    base_url: str = "https://api.openai.com/v1"


def build_provider(config: ProviderConfig) -> Provider:
    if config.kind == "mock":
        script = (
            MockScript.from_file(config.mock_script_path)
            if config.mock_script_path
            else MockScript()
        )
        return MockProvider(script)
    if config.kind == "real":
        return RealProvider(
            model_id=config.model_id,
            api_key_env=config.api_key_env,
            embedding_model_id=config.embedding_model_id,
            base_url=config.base_url,
        )
    raise ValueError(f"unknown provider kind {config.kind!r}")


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    num = sum(x * y for x, y in zip(a, b))
    na = sum(x * x for x in a) ** 0.5
    nb = sum(y * y for y in b) ** 0.5
    if na == 0 or nb == 0:
        return 0.0
    return num / (na * nb)
