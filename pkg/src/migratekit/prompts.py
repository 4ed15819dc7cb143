"""Prompt rendering for translation and repair requests.

Rendering is pure string assembly: equal inputs produce identical bytes,
which the replay backend relies on (prompts are keyed by SHA-256).
"""

from __future__ import annotations

import hashlib

from .context_prober import Declaration, TranslationUnit

TRANSLATION_GUIDELINES = (
    "Translate only the code to be converted. The context sections exist for "
    "reference; do not emit translations of them.",
    "Translate the function completely. Never omit, abbreviate, or replace any "
    "part of the body with a comment.",
    "Keep the original function name.",
    "Reply with a single fenced Rust code block containing exactly one function.",
)

REPAIR_GUIDELINES = (
    "Edit only the core function named in the task. Keep every other item "
    "byte-for-byte unchanged.",
    "Fix the listed compiler errors; do not restructure working code.",
    "Reply with a single fenced Rust code block containing the full repaired "
    "function.",
)

MAX_PROMPT_DIAGNOSTICS = 20


def _decl_block(title: str, decls: tuple[Declaration, ...]) -> str:
    lines = [f"### {title}"]
    if decls:
        lines.append("```c")
        lines.extend(d.decl_text.rstrip("\n") for d in decls)
        lines.append("```")
    else:
        lines.append("(none)")
    return "\n".join(lines)


def _rules_block(project_rules) -> str:
    lines = ["## Project requirements"]
    if project_rules:
        lines.extend(f"- {r}" for r in project_rules)
    else:
        lines.append("- (none)")
    return "\n".join(lines)


def render_translation_prompt(unit: TranslationUnit, project_rules=()) -> str:
    parts = [
        "You are translating one C function into Rust.",
        "",
        "## Code context",
        "The context has these sections: types and macros, external variables, "
        "called functions, and the code to be converted.",
        "",
        _decl_block("Types and macros", unit.types_and_macros),
        "",
        _decl_block("External variables", unit.external_variables),
        "",
        _decl_block("Called functions", unit.called_functions),
        "",
        "### Code to be converted",
        "```c",
        unit.core.body_text.rstrip("\n"),
        "```",
        "",
        "## Translation guidelines",
    ]
    parts.extend(f"- {g}" for g in TRANSLATION_GUIDELINES)
    parts.append("")
    parts.append(_rules_block(project_rules))
    return "\n".join(parts) + "\n"


def render_repair_prompt(
    core_name: str, code: str, rendered_diagnostics: list[str], project_rules=()
) -> str:
    shown = rendered_diagnostics[:MAX_PROMPT_DIAGNOSTICS]
    parts = [
        f"You are repairing the Rust function `{core_name}`; the unit below "
        "fails to compile.",
        "",
        "## Problematic code",
        "```rust",
        code.rstrip("\n"),
        "```",
        "",
        "## Compiler errors",
        "```",
        "\n".join(d.rstrip("\n") for d in shown),
        "```",
        "",
        "## Repair guidelines",
    ]
    parts.extend(f"- {g}" for g in REPAIR_GUIDELINES)
    parts.append("")
    parts.append(_rules_block(project_rules))
    return "\n".join(parts) + "\n"


def prompt_sha256(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()
