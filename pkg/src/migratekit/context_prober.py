"""Declaration-only context assembly for core functions.

Resolves each free identifier of a function by global search over the
codebase, classifies it by usage, and assembles the translation context:
macros, types, external variables and called-function prototypes, with
function bodies always excluded.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

from .c_lexer import C_BUILTINS, C_KEYWORDS, tokenize
from .c_frontend import FunctionUnit, ModuleIR
from .errors import AmbiguousSymbol, ContextBudgetExceeded, SymbolNotFound

DEFAULT_CONTEXT_BUDGET = 200  # total lines, context plus core


@dataclass(frozen=True)
class SymbolRef:
    name: str
    kind: str  # variable | function | type | macro | field-unknown
    origin: str  # FunctionUnit id


@dataclass(frozen=True)
class Declaration:
    symbol: SymbolRef
    decl_text: str
    source: tuple[str, int]  # (file, line)

    def line_count(self) -> int:
        return self.decl_text.rstrip("\n").count("\n") + 1


@dataclass(frozen=True)
class TranslationUnit:
    core: FunctionUnit
    types_and_macros: tuple[Declaration, ...]
    external_variables: tuple[Declaration, ...]
    called_functions: tuple[Declaration, ...]
    context_line_count: int

    def declarations(self) -> tuple[Declaration, ...]:
        return self.types_and_macros + self.external_variables + self.called_functions


@dataclass
class CodebaseIndex:
    """Defining occurrences per (name, kind), plus the include graph."""

    module: ModuleIR
    defs: dict[tuple[str, str], list[tuple[str, int, str]]] = field(default_factory=dict)
    includes: dict[str, set[str]] = field(default_factory=dict)

    @classmethod
    def build(cls, module: ModuleIR) -> "CodebaseIndex":
        idx = cls(module)
        for d in module.declarations:
            for name, kind in d.entries:
                idx.defs.setdefault((name, kind), []).append(
                    (d.file, d.span[0], d.text.rstrip("\n"))
                )
            if d.include_target:
                target = _match_include(d.include_target, module)
                if target:
                    idx.includes.setdefault(d.file, set()).add(target)
        for u in module.functions:
            proto = u.signature.strip() + ";"
            idx.defs.setdefault((u.name, "function-def"), []).append(
                (u.file, u.body_span[0], proto)
            )
        return idx

    def include_distance(self, src: str, dst: str) -> int | None:
        if src == dst:
            return 0
        seen = {src}
        q = deque([(src, 0)])
        while q:
            cur, d = q.popleft()
            for nxt in sorted(self.includes.get(cur, ())):
                if nxt == dst:
                    return d + 1
                if nxt not in seen:
                    seen.add(nxt)
                    q.append((nxt, d + 1))
        return None


def _match_include(target: str, module: ModuleIR) -> str | None:
    for f in module.files:
        if f.path == target or f.path.endswith("/" + target.lstrip("./")):
            return f.path
    return None


def _usage_positions(core: FunctionUnit) -> tuple[set[str], set[str], set[str]]:
    """(call-position names, member-position names, tag-position names)."""
    toks = [t for t in tokenize(core.body_text, core.file) if t.kind != "comment"]
    calls: set[str] = set()
    members: set[str] = set()
    tags: set[str] = set()
    for i, t in enumerate(toks):
        if t.kind != "ident":
            continue
        prev = toks[i - 1] if i > 0 else None
        nxt = toks[i + 1] if i + 1 < len(toks) else None
        if prev is not None and prev.kind == "punct" and prev.text in (".", "->"):
            members.add(t.text)
            continue
        if prev is not None and prev.kind == "keyword" and prev.text in (
            "struct",
            "union",
            "enum",
        ):
            tags.add(t.text)
            continue
        if nxt is not None and nxt.kind == "punct" and nxt.text == "(":
            calls.add(t.text)
    return calls, members, tags


def collect_unresolved(
    core: FunctionUnit, module: ModuleIR, builtins: frozenset[str] = frozenset()
) -> list[SymbolRef]:
    """Free identifiers of `core`, classified by best-effort kind from usage."""
    skip = C_KEYWORDS | C_BUILTINS | builtins
    calls, members, tags = _usage_positions(core)
    macro_names = module.macro_names()
    type_names = module.type_names()
    refs: list[SymbolRef] = []
    for name in sorted(core.referenced):
        if name in skip:
            continue
        if name in members and name not in calls:
            kind = "field-unknown"
        elif name in macro_names:
            kind = "macro"
        elif name in calls:
            kind = "function"
        elif name in tags or name in type_names:
            kind = "type"
        elif name.isupper() and len(name) > 1:
            kind = "macro"
        else:
            kind = "variable"
        refs.append(SymbolRef(name, kind, core.id))
    return refs


def global_search(
    sym: SymbolRef,
    index: CodebaseIndex,
    core_file: str | None = None,
    ambiguity_log: list | None = None,
    strict: bool = False,
) -> Declaration:
    """Find the defining occurrence for a symbol; prototypes are synthesized
    from function definitions when no separate prototype exists."""
    if sym.kind == "field-unknown":
        raise SymbolNotFound(sym.name)
    if sym.kind == "function":
        cands = list(index.defs.get((sym.name, "prototype"), []))
        if not cands:
            cands = list(index.defs.get((sym.name, "function-def"), []))
    else:
        cands = list(index.defs.get((sym.name, sym.kind), []))
        if not cands and sym.kind == "variable":
            # a misclassified callable constant may still be a macro
            cands = list(index.defs.get((sym.name, "macro"), []))
    if not cands:
        raise SymbolNotFound(sym.name)
    if len(cands) > 1:
        if strict:
            raise AmbiguousSymbol(sym.name, [(f, ln) for f, ln, _ in cands])
        if ambiguity_log is not None:
            ambiguity_log.append(
                {
                    "name": sym.name,
                    "kind": sym.kind,
                    "candidates": [{"file": f, "line": ln} for f, ln, _ in sorted(cands)],
                }
            )

        def rank(cand):
            f, ln, _ = cand
            if core_file is not None and f == core_file:
                return (0, 0, f, ln)
            dist = index.include_distance(core_file, f) if core_file else None
            if dist == 1:
                return (1, 0, f, ln)
            if dist is not None:
                return (2, dist, f, ln)
            return (3, 0, f, ln)

        cands.sort(key=rank)
    f, ln, text = cands[0]
    return Declaration(sym, text, (f, ln))


def _closure(
    decls: list[Declaration], index: CodebaseIndex, origin: str
) -> list[Declaration]:
    """Pull in type/macro definitions referenced from included declarations."""
    known = {(d.symbol.name, d.symbol.kind) for d in decls}
    type_names = index.module.type_names()
    macro_names = index.module.macro_names()
    out = list(decls)
    queue = deque(out)
    while queue:
        d = queue.popleft()
        try:
            toks = tokenize(d.decl_text, d.source[0])
        except Exception:
            continue
        for t in toks:
            if t.kind != "ident":
                continue
            name = t.text
            kind = None
            if name in type_names:
                kind = "type"
            elif name in macro_names:
                kind = "macro"
            if kind is None or (name, kind) in known or name == d.symbol.name:
                continue
            try:
                dep = global_search(SymbolRef(name, kind, origin), index, d.source[0])
            except SymbolNotFound:
                continue
            known.add((name, kind))
            out.append(dep)
            queue.append(dep)
    return out


def assemble_context(
    core: FunctionUnit,
    decls: list[Declaration],
    budget: int = DEFAULT_CONTEXT_BUDGET,
    index: CodebaseIndex | None = None,
) -> TranslationUnit:
    """Order declarations (macros, types, variables, prototypes), close over
    type dependencies, and enforce the line budget."""
    seen: set[tuple[str, str]] = set()
    unique: list[Declaration] = []
    for d in decls:
        key = (d.symbol.name, d.symbol.kind)
        if key not in seen:
            seen.add(key)
            unique.append(d)
    if index is not None:
        unique = _closure(unique, index, core.id)
    macros = [d for d in unique if d.symbol.kind == "macro"]
    types = [d for d in unique if d.symbol.kind == "type"]
    variables = [d for d in unique if d.symbol.kind == "variable"]
    functions = [d for d in unique if d.symbol.kind == "function"]
    ordered_tm = tuple(macros + types)
    context_lines = sum(d.line_count() for d in unique)
    unit = TranslationUnit(
        core=core,
        types_and_macros=ordered_tm,
        external_variables=tuple(variables),
        called_functions=tuple(functions),
        context_line_count=context_lines,
    )
    if context_lines + core.line_count > budget:
        raise ContextBudgetExceeded(context_lines + core.line_count, budget)
    return unit


def assemble_context_fitting(
    core: FunctionUnit,
    decls: list[Declaration],
    budget: int = DEFAULT_CONTEXT_BUDGET,
    index: CodebaseIndex | None = None,
) -> tuple[TranslationUnit, list[str]]:
    """Pipeline wrapper: on budget overflow, warn and drop external variable
    declarations last-in-first-dropped until the unit fits (or none remain)."""
    warnings: list[str] = []
    work = list(decls)
    while True:
        try:
            return assemble_context(core, work, budget, index), warnings
        except ContextBudgetExceeded as e:
            droppable = [d for d in work if d.symbol.kind == "variable"]
            if not droppable:
                warnings.append(
                    f"{core.id}: context exceeds budget ({e.needed} > {e.budget}) "
                    "with no variable declarations left to drop; proceeding oversized"
                )
                unit = assemble_context(core, work, budget=10**9, index=index)
                return unit, warnings
            victim = droppable[-1]
            warnings.append(
                f"{core.id}: over context budget ({e.needed} > {e.budget}); "
                f"dropped variable declaration `{victim.symbol.name}`"
            )
            work = [d for d in work if d is not victim]


def probe_context(
    core: FunctionUnit,
    module: ModuleIR,
    index: CodebaseIndex,
    budget: int = DEFAULT_CONTEXT_BUDGET,
    builtins: frozenset[str] = frozenset(),
) -> tuple[TranslationUnit, list[dict], list[str], list[dict]]:
    """Full per-function probe: returns (unit, unresolved report, warnings,
    ambiguity log)."""
    unresolved: list[dict] = []
    ambiguities: list[dict] = []
    decls: list[Declaration] = []
    for sym in collect_unresolved(core, module, builtins):
        try:
            decls.append(global_search(sym, index, core.file, ambiguities))
        except SymbolNotFound:
            unresolved.append({"name": sym.name, "kind": sym.kind})
    unit, warnings = assemble_context_fitting(core, decls, budget, index)
    return unit, unresolved, warnings, ambiguities


def render_ctx_c(unit: TranslationUnit) -> str:
    """The assembled unit as compilable-order C text."""
    parts: list[str] = []

    def block(title: str, decls: tuple[Declaration, ...]):
        parts.append(f"/* {title} */")
        if decls:
            parts.extend(d.decl_text for d in decls)
        else:
            parts.append("/* (none) */")
        parts.append("")

    block("types and macros", unit.types_and_macros)
    block("external variables", unit.external_variables)
    block("called functions", unit.called_functions)
    parts.append("/* code to be converted */")
    parts.append(unit.core.body_text.rstrip("\n"))
    return "\n".join(parts) + "\n"


def unresolved_report_json(unresolved: list[dict], ambiguities: list[dict]) -> str:
    return json.dumps(
        {"unresolved": unresolved, "ambiguous": ambiguities}, indent=2, sort_keys=True
    ) + "\n"
