"""Function translation: backends, syntax-retry loop, laziness detection."""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import requests

from .context_prober import TranslationUnit
from .errors import BackendUnavailable, FixtureMiss
from .naive_transpiler import UnsupportedConstruct, naive_transpile
from .prompts import prompt_sha256, render_translation_prompt
from .rust_lexer import RustLexError, tokenize as rust_tokenize
from .rust_syntax import SyntaxIssue, parse_items, rename_fn, syntax_issues
from . import c_syntax

DEFAULT_RETRY_CAP = 3
DEFAULT_PLACEHOLDER_PATTERNS = ("rest of", "remaining", "omitted", "similar to above")
DEFAULT_RATIO_THRESHOLD = 0.4
DEFAULT_MIN_C_STATEMENTS = 10

_FENCE_RE = re.compile(r"```[a-zA-Z]*\s*\n(.*?)```", re.DOTALL)


@dataclass(frozen=True)
class LazinessConfig:
    placeholder_patterns: tuple[str, ...] = DEFAULT_PLACEHOLDER_PATTERNS
    ratio_threshold: float = DEFAULT_RATIO_THRESHOLD
    min_c_statements: int = DEFAULT_MIN_C_STATEMENTS


@dataclass(frozen=True)
class LazinessVerdict:
    lazy: bool
    evidence: tuple[dict, ...] = ()

    def __post_init__(self):
        assert not self.lazy or self.evidence


@dataclass(frozen=True)
class TranslatedFunction:
    core_id: str
    rust_text: str
    attempts: int
    laziness: LazinessVerdict
    status: str  # syntax-ok | syntax-failed | lazy-flagged


class ReplayBackend:
    """Replays recorded completions: SHA-256(prompt) -> list, consumed in
    order. Total over the bundled fixture corpora by construction."""

    kind = "replay"

    def __init__(self, fixture_path: str | Path):
        self.path = Path(fixture_path)
        self._data: dict[str, list[str]] = json.loads(self.path.read_text(encoding="utf-8"))
        self._cursor: dict[str, int] = {}

    def complete(self, prompt: str, *, unit: TranslationUnit | None = None) -> str:
        h = prompt_sha256(prompt)
        recorded = self._data.get(h)
        at = self._cursor.get(h, 0)
        if not recorded or at >= len(recorded):
            raise FixtureMiss(h)
        self._cursor[h] = at + 1
        return recorded[at]

    def reset(self):
        self._cursor.clear()


class LiveHttpBackend:
    """Chat-completion-style HTTP backend; credential from MIGRATEKIT_API_KEY."""

    kind = "live-http"

    def __init__(self, endpoint: str, model: str, timeout: float = 120.0,
                 api_key_env: str = "MIGRATEKIT_API_KEY"):
        self.endpoint = endpoint
        self.model = model
        self.timeout = timeout
        self.api_key_env = api_key_env

    def complete(self, prompt: str, *, unit: TranslationUnit | None = None) -> str:
        key = os.environ.get(self.api_key_env, "")
        headers = {"Content-Type": "application/json"}
        if key:
            headers["Authorization"] = f"Bearer {key}"
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        }
        try:
            resp = requests.post(self.endpoint, json=body, headers=headers,
                                 timeout=self.timeout)
            resp.raise_for_status()
            payload = resp.json()
            return payload["choices"][0]["message"]["content"]
        except (requests.RequestException, KeyError, IndexError, ValueError) as e:
            raise BackendUnavailable(f"live endpoint failed: {e}") from e


class RuleFallbackBackend:
    """Offline backend: answers every prompt with the naive transpiler's
    unsafe Rust for the unit's core function."""

    kind = "fallback-rule"

    def complete(self, prompt: str, *, unit: TranslationUnit | None = None) -> str:
        if unit is None:
            raise BackendUnavailable("fallback-rule backend needs the translation unit")
        try:
            return f"```rust\n{naive_transpile(unit.core)}\n```"
        except UnsupportedConstruct as e:
            raise BackendUnavailable(f"naive transpiler cannot handle {unit.core.id}: {e}")


class RecordingBackend:
    """Wraps another backend and records prompt->completions; fixture tooling."""

    kind = "recording"

    def __init__(self, inner):
        self.inner = inner
        self.recorded: dict[str, list[str]] = {}

    def complete(self, prompt: str, *, unit: TranslationUnit | None = None) -> str:
        completion = self.inner.complete(prompt, unit=unit)
        self.recorded.setdefault(prompt_sha256(prompt), []).append(completion)
        return completion

    def dump(self, path: str | Path):
        Path(path).write_text(
            json.dumps(self.recorded, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


def extract_code(completion: str) -> str:
    """Code from the first fenced block; an unfenced completion is all code."""
    m = _FENCE_RE.search(completion)
    return m.group(1) if m else completion


def extract_core_item(code: str, core_name: str) -> str | None:
    """The single core-function item: drops extra items, rewrites the name."""
    items, issues = parse_items(code)
    if issues:
        return None
    fns = [it for it in items if it.kind == "fn"]
    if not fns:
        return None
    named = [it for it in fns if it.name == core_name]
    chosen = named[0] if named else fns[0]
    text = chosen.text
    if chosen.name != core_name:
        text = rename_fn(text, core_name)
    return text


def check_syntax(rust_text: str) -> list[SyntaxIssue]:
    """Empty iff the text parses as a Rust item sequence."""
    return syntax_issues(rust_text)


def detect_laziness(
    c_body: str, rust_text: str, config: LazinessConfig = LazinessConfig()
) -> LazinessVerdict:
    """Two-rule detector: placeholder comments, and a low statement ratio on
    functions with enough statements to judge."""
    assert c_body and rust_text
    evidence: list[dict] = []
    try:
        rtoks = rust_tokenize(rust_text)
    except RustLexError:
        rtoks = []
    for t in rtoks:
        if t.kind == "comment":
            content = t.text.lstrip("/").strip("/* \t").strip()
            lowered = content.lower()
            for pat in config.placeholder_patterns:
                if pat in lowered:
                    evidence.append({"rule": "placeholder-comment", "match": pat,
                                     "comment": content})
                    break
            else:
                if content.strip(".") == "" and "..." in t.text:
                    evidence.append({"rule": "placeholder-comment", "match": "...",
                                     "comment": content})
        elif t.kind == "punct" and t.text == "...":
            evidence.append({"rule": "placeholder-comment", "match": "...",
                             "comment": "bare ellipsis statement"})
    c_statements = c_syntax.count_statements(c_body)
    rust_statements = c_syntax.count_rust_statements(rust_text)
    if c_statements >= config.min_c_statements:
        ratio = rust_statements / c_statements
        if ratio < config.ratio_threshold:
            evidence.append(
                {
                    "rule": "statement-ratio",
                    "ratio": round(ratio, 4),
                    "c_statements": c_statements,
                    "rust_statements": rust_statements,
                }
            )
    # deduplicate placeholder hits on the same pattern
    seen = set()
    unique: list[dict] = []
    for ev in evidence:
        key = (ev["rule"], ev.get("match", ""))
        if key not in seen:
            seen.add(key)
            unique.append(ev)
    return LazinessVerdict(lazy=bool(unique), evidence=tuple(unique))


def translate(
    unit: TranslationUnit,
    backend,
    retry_cap: int = DEFAULT_RETRY_CAP,
    project_rules=(),
    laziness: LazinessConfig = LazinessConfig(),
    attempt_sink=None,
) -> TranslatedFunction:
    """Bounded syntax-retry loop around the backend; returns the first
    syntactically valid completion stripped to the core function item."""
    assert retry_cap >= 1
    prompt = render_translation_prompt(unit, project_rules)
    last_code = ""
    attempts = 0
    while attempts < retry_cap:
        attempts += 1
        completion = backend.complete(prompt, unit=unit)
        code = extract_code(completion)
        if attempt_sink is not None:
            attempt_sink(attempts, code)
        last_code = code
        if check_syntax(code):
            continue
        core_item = extract_core_item(code, unit.core.name)
        if core_item is None:
            continue
        verdict = detect_laziness(unit.core.body_text, core_item, laziness)
        status = "lazy-flagged" if verdict.lazy else "syntax-ok"
        return TranslatedFunction(unit.core.id, core_item, attempts, verdict, status)
    return TranslatedFunction(
        unit.core.id, last_code, attempts, LazinessVerdict(False, ()), "syntax-failed"
    )


def make_backend(kind: str, config: dict):
    if kind == "replay":
        return ReplayBackend(config["fixture_path"])
    if kind == "live-http":
        return LiveHttpBackend(
            endpoint=config["endpoint"],
            model=config.get("model", ""),
            timeout=float(config.get("timeout", 120.0)),
        )
    if kind == "fallback-rule":
        return RuleFallbackBackend()
    raise BackendUnavailable(f"unknown backend kind: {kind}")
