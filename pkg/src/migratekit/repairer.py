"""Bounded diagnose-and-repair loop with a rule-based unsafe fallback.

Each round feeds the failing unit plus verbatim compiler errors back to the
backend, accepts only the repaired core function, and recompiles. After the
cap the unit falls back to stored (or naively transpiled) unsafe Rust.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

from .c_frontend import FunctionUnit
from .errors import FallbackMissing
from .naive_transpiler import UnsupportedConstruct, naive_transpile
from .prompts import MAX_PROMPT_DIAGNOSTICS, render_repair_prompt
from .rust_prober import (
    Diagnostic,
    ProbeItem,
    ResolvedUnit,
    ScaffoldConfig,
    compile_check,
)
from .rust_syntax import parse_items, rename_fn
from .translator import extract_code

DEFAULT_REPAIR_CAP = 3


@dataclass(frozen=True)
class RepairAttempt:
    round: int  # 1-based
    input_diagnostics: tuple[Diagnostic, ...]
    repaired_core: str
    outcome: str  # compiles | still-failing | rejected-noncore-edit


@dataclass(frozen=True)
class RepairOutcome:
    core_id: str
    final_status: str  # repaired | fallback-applied | manual-required
    attempts: tuple[RepairAttempt, ...]
    final_unit: ResolvedUnit


def _normalized(text: str) -> str:
    return " ".join(text.split())


def _accept_completion(
    code: str, unit: ResolvedUnit
) -> tuple[str | None, bool]:
    """Extract the repaired core item; detect edits to non-core items.

    Returns (core text or None, noncore_edit). Extra unknown items are
    discarded like the translator does.
    """
    items, issues = parse_items(code)
    if issues:
        return None, False
    core_name = unit.core_item.name
    existing = {it.name: it for it in unit.context_items}
    repaired: str | None = None
    noncore_edit = False
    fns = [it for it in items if it.kind == "fn"]
    named = [it for it in fns if it.name == core_name]
    chosen = named[0] if named else (fns[0] if len(fns) == 1 else None)
    for it in items:
        if chosen is not None and it is chosen:
            continue
        key = it.name or it.key
        prev = existing.get(key)
        if prev is not None and _normalized(prev.text) != _normalized(it.text):
            noncore_edit = True
    if chosen is not None:
        repaired = chosen.text
        if chosen.name != core_name:
            repaired = rename_fn(repaired, core_name)
    return repaired, noncore_edit


def ensure_unsafe_marked(item_text: str) -> str:
    """Guarantee the fallback item is unsafe-marked (unsafe fn or body block)."""
    items, issues = parse_items(item_text)
    if not issues and items and items[0].kind == "fn" and "unsafe" not in item_text.split("{")[0]:
        idx = item_text.find("fn ")
        if idx != -1:
            return item_text[:idx] + "unsafe " + item_text[idx:]
    return item_text


def apply_fallback(core: FunctionUnit, fallback_store: dict[str, str]) -> str:
    """The stored unsafe item, name-normalized to the core name."""
    text = fallback_store.get(core.id)
    if text is None:
        raise FallbackMissing(core.id)
    return ensure_unsafe_marked(rename_fn(text, core.name))


def make_fallback_store(
    units: list[FunctionUnit], file_store: dict[str, str] | None = None
) -> dict[str, str]:
    """Offline store plus built-in naive transpilations for the mini subset."""
    store = dict(file_store or {})
    for u in units:
        if u.id in store:
            continue
        try:
            store[u.id] = naive_transpile(u)
        except UnsupportedConstruct:
            pass
    return store


def repair(
    unit: ResolvedUnit,
    backend,
    cap: int = DEFAULT_REPAIR_CAP,
    scaffold: ScaffoldConfig = ScaffoldConfig(),
    scratch_dir: str | Path | None = None,
    project_rules=(),
    fallback_store: dict[str, str] | None = None,
    core_fn: FunctionUnit | None = None,
    attempt_sink=None,
) -> RepairOutcome:
    """Run up to `cap` repair rounds, then fall back or require manual work."""
    assert unit.status != "compiles"
    assert cap >= 1
    attempts: list[RepairAttempt] = []
    current = unit
    diags = list(unit.diagnostics)
    if not diags:
        diags = compile_check([it.text for it in current.items], scaffold, scratch_dir)
    for round_no in range(1, cap + 1):
        prompt = render_repair_prompt(
            current.core_item.name,
            current.rendered(),
            [d.rendered for d in diags[:MAX_PROMPT_DIAGNOSTICS]],
            project_rules,
        )
        completion = backend.complete(prompt, unit=None)
        code = extract_code(completion)
        repaired, noncore_edit = _accept_completion(code, current)
        if attempt_sink is not None:
            attempt_sink(round_no, code)
        if noncore_edit or repaired is None:
            attempts.append(
                RepairAttempt(round_no, tuple(diags), repaired or "", "rejected-noncore-edit"
                              if noncore_edit else "still-failing")
            )
            continue  # round consumed, unit unchanged
        candidate_items = current.context_items + (
            ProbeItem(current.core_item.name, repaired, "translated"),
        )
        new_diags = compile_check([it.text for it in candidate_items], scaffold, scratch_dir)
        if not new_diags:
            final = replace(
                current, items=candidate_items, diagnostics=(), status="compiles"
            )
            attempts.append(RepairAttempt(round_no, tuple(diags), repaired, "compiles"))
            return RepairOutcome(unit.core_id, "repaired", tuple(attempts), final)
        attempts.append(RepairAttempt(round_no, tuple(diags), repaired, "still-failing"))
        current = replace(
            current,
            items=candidate_items,
            diagnostics=tuple(new_diags),
            status=current.status,
        )
        diags = list(new_diags)
    # cap exhausted: rule-based fallback, else manual
    if fallback_store is not None and core_fn is not None and core_fn.id in fallback_store:
        fb_text = apply_fallback(core_fn, fallback_store)
        fb_items = current.context_items + (
            ProbeItem(current.core_item.name, fb_text, "fallback"),
        )
        fb_diags = compile_check([it.text for it in fb_items], scaffold, scratch_dir)
        final = replace(
            current,
            items=fb_items,
            diagnostics=tuple(fb_diags),
            status="compiles" if not fb_diags else current.status,
        )
        return RepairOutcome(unit.core_id, "fallback-applied", tuple(attempts), final)
    final = replace(current, status="manual-required")
    return RepairOutcome(unit.core_id, "manual-required", tuple(attempts), final)
