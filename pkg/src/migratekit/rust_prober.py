"""Compiler-driven resolution of translated functions.

Each probe iteration compiles the unit in an isolated scratch workspace,
reads resolution-class diagnostics, and appends matching definitions from
translated callees (preferred) or the context catalog until the unit
compiles, progress stops, or the iteration cap is hit.
"""

from __future__ import annotations

import json
import re
import shutil
import subprocess
import tempfile
from dataclasses import dataclass, field, replace
from pathlib import Path

from .c_frontend import CGroup, ModuleIR, build_groups
from .c_lexer import CToken, tokenize as c_tokenize
from .errors import ScaffoldError, ToolchainMissing
from .naive_transpiler import UnsupportedConstruct, _map_type
from .rust_syntax import parse_items
from .translator import TranslatedFunction

DEFAULT_MAX_ITERS = 20
# Symbol-resolution error codes; everything else is repair-stage material.
RESOLUTION_CODES = frozenset(
    ["E0425", "E0412", "E0433", "E0609", "E0573", "E0574", "E0689"]
)
_BACKTICK_NAME_RE = re.compile(r"`([A-Za-z_]\w*)`")

DEFAULT_PRELUDE = (
    "#![allow(dead_code)]",
    "#![allow(unused_variables)]",
    "#![allow(unused_mut)]",
    "#![allow(unused_unsafe)]",
    "#![allow(unused_imports)]",
    "#![allow(unused_parens)]",
    "#![allow(unused_assignments)]",
    "#![allow(non_camel_case_types)]",
    "#![allow(non_upper_case_globals)]",
    "#![allow(non_snake_case)]",
)


@dataclass(frozen=True)
class ScaffoldConfig:
    edition: str = "2021"
    no_std: bool = False
    prelude: tuple[str, ...] = DEFAULT_PRELUDE
    rustc: str = "rustc"

    def header(self) -> str:
        lines = (("#![no_std]",) if self.no_std else ()) + self.prelude
        return "\n".join(lines) + "\n\n"


@dataclass(frozen=True)
class Diagnostic:
    code: str | None
    message: str
    primary_symbol: str | None
    span: tuple[str, int, int] | None  # (file, line, col)
    rendered: str
    level: str = "error"

    def is_resolution(self) -> bool:
        return self.code in RESOLUTION_CODES

    def to_json(self) -> dict:
        return {
            "code": self.code,
            "message": self.message,
            "primary_symbol": self.primary_symbol,
            "span": list(self.span) if self.span else None,
            "rendered": self.rendered,
            "level": self.level,
        }


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    kind: str  # type | macro-const | variable | extern-fn
    rust_text: str
    provenance: str = "generated"  # generated | translated | manual


@dataclass(frozen=True)
class ContextCatalog:
    entries: tuple[CatalogEntry, ...]

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            key = (e.name, e.kind)
            if key in seen:
                raise ValueError(f"duplicate catalog entry {key}")
            seen.add(key)
            _, issues = parse_items(e.rust_text)
            if issues:
                raise ValueError(f"catalog entry {e.name} does not parse: {issues[0]}")

    def by_name(self, name: str) -> list[CatalogEntry]:
        return [e for e in self.entries if e.name == name]

    @classmethod
    def load(cls, path: str | Path) -> "ContextCatalog":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(tuple(CatalogEntry(**e) for e in data["entries"]))

    def save(self, path: str | Path):
        payload = {"entries": [e.__dict__ for e in self.entries]}
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                              encoding="utf-8")

    @classmethod
    def empty(cls) -> "ContextCatalog":
        return cls(())


@dataclass(frozen=True)
class ProbeItem:
    name: str
    text: str
    provenance: str  # translated | catalog | fallback | manual
    kind: str = "fn"


@dataclass(frozen=True)
class ResolvedUnit:
    core_id: str
    items: tuple[ProbeItem, ...]  # context items first, core function last
    diagnostics: tuple[Diagnostic, ...]
    iterations_used: int
    status: str  # compiles | unresolved-remaining | compile-error | manual-required
    lazy_callees: tuple[str, ...] = ()

    @property
    def core_item(self) -> ProbeItem:
        return self.items[-1]

    @property
    def context_items(self) -> tuple[ProbeItem, ...]:
        return self.items[:-1]

    def rendered(self) -> str:
        return "\n\n".join(it.text.rstrip("\n") for it in self.items) + "\n"


def render_items(texts: list[str]) -> str:
    return "\n\n".join(t.rstrip("\n") for t in texts) + "\n"


def _parse_rustc_json(stderr: str) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    for line in stderr.splitlines():
        line = line.strip()
        if not line.startswith("{"):
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            continue
        if obj.get("$message_type") != "diagnostic":
            continue
        level = obj.get("level", "")
        message = obj.get("message", "")
        if level != "error" or message.startswith("aborting due to"):
            continue
        code = (obj.get("code") or {}).get("code")
        span = None
        for s in obj.get("spans", []):
            if s.get("is_primary"):
                span = (s.get("file_name", ""), s.get("line_start", 0),
                        s.get("column_start", 0))
                break
        symbol = None
        if code in RESOLUTION_CODES:
            m = _BACKTICK_NAME_RE.search(message)
            if m:
                symbol = m.group(1)
            elif span is not None:
                symbol = ""
        diags.append(
            Diagnostic(code, message, symbol, span, obj.get("rendered") or message, level)
        )
    return diags


def compile_check(
    item_texts: list[str],
    scaffold: ScaffoldConfig = ScaffoldConfig(),
    scratch_dir: str | Path | None = None,
) -> list[Diagnostic]:
    """Check-only compilation of the items in an isolated scratch workspace."""
    for t in item_texts:
        _, issues = parse_items(t)
        if issues:
            raise ScaffoldError(f"item does not parse before compile: {issues[0]}")
    if shutil.which(scaffold.rustc) is None:
        raise ToolchainMissing(f"`{scaffold.rustc}` not found on PATH")
    own_tmp = scratch_dir is None
    workdir = Path(tempfile.mkdtemp(prefix="migratekit-")) if own_tmp else Path(scratch_dir)
    try:
        workdir.mkdir(parents=True, exist_ok=True)
        source = scaffold.header() + render_items(item_texts)
        try:
            (workdir / "unit.rs").write_text(source, encoding="utf-8")
        except OSError as e:
            raise ScaffoldError(f"cannot write scratch crate: {e}") from e
        proc = subprocess.run(
            [
                scaffold.rustc,
                "--edition", scaffold.edition,
                "--crate-type", "lib",
                "--emit=metadata",
                "--error-format=json",
                "--out-dir", ".",
                "unit.rs",
            ],
            cwd=workdir,
            capture_output=True,
            text=True,
        )
        return _parse_rustc_json(proc.stderr)
    finally:
        if own_tmp:
            shutil.rmtree(workdir, ignore_errors=True)


_KIND_PRIORITY = ("type", "macro-const", "variable", "extern-fn")  # highest first


def lookup_definition(
    name: str, catalog: ContextCatalog, callees: dict[str, str]
) -> tuple[str, str, str] | None:
    """Resolve a symbol to (text, provenance, kind); callees win over catalog."""
    if name in callees:
        return callees[name], "translated", "fn"
    found = {e.kind: e for e in catalog.by_name(name)}
    for kind in _KIND_PRIORITY:
        if kind in found:
            e = found[kind]
            return e.rust_text, "catalog", e.kind
    return None


def probe(
    core: TranslatedFunction,
    catalog: ContextCatalog,
    translated_callees: dict[str, str],
    max_iters: int = DEFAULT_MAX_ITERS,
    scaffold: ScaffoldConfig = ScaffoldConfig(),
    scratch_dir: str | Path | None = None,
    lazy_callee_names: frozenset[str] = frozenset(),
    diag_log: list | None = None,
    core_provenance: str = "translated",
) -> ResolvedUnit:
    """Iterate compile -> extract unresolved symbols -> append definitions."""
    assert core.status in ("syntax-ok", "lazy-flagged")
    assert max_iters >= 1
    core_name = core.core_id.rsplit("::", 1)[-1]
    context: list[ProbeItem] = []
    present: set[str] = {core_name}
    lazy_hits: list[str] = []
    iterations = 0
    diags: list[Diagnostic] = []
    while iterations < max_iters:
        iterations += 1
        diags = compile_check(
            [it.text for it in context] + [core.rust_text], scaffold, scratch_dir
        )
        if diag_log is not None:
            diag_log.append([d.to_json() for d in diags])
        if not diags:
            return ResolvedUnit(
                core.core_id,
                tuple(context) + (ProbeItem(core_name, core.rust_text, core_provenance),),
                (),
                iterations,
                "compiles",
                tuple(lazy_hits),
            )
        wanted: list[str] = []
        for d in diags:
            if d.is_resolution() and d.primary_symbol and d.primary_symbol not in wanted:
                wanted.append(d.primary_symbol)
        added = False
        for name in wanted:
            if name in present:
                continue
            hit = lookup_definition(name, catalog, translated_callees)
            if hit is None:
                continue
            text, provenance, kind = hit
            context.append(ProbeItem(name, text, provenance, kind))
            present.add(name)
            added = True
            if name in lazy_callee_names:
                lazy_hits.append(name)
        if not added:
            break
    status = (
        "unresolved-remaining"
        if any(d.is_resolution() for d in diags)
        else "compile-error"
    )
    return ResolvedUnit(
        core.core_id,
        tuple(context) + (ProbeItem(core_name, core.rust_text, core_provenance),),
        tuple(diags),
        iterations,
        status,
        tuple(lazy_hits),
    )


# --- built-in simplified catalog generator (bindgen stand-in) ---------------


def _struct_entry(name: str, decl_text: str) -> CatalogEntry | None:
    try:
        toks = [t for t in c_tokenize(decl_text, "<decl>") if t.kind != "comment"]
        elems = build_groups(toks, "<decl>")
    except Exception:
        return None
    brace = next((e for e in elems if isinstance(e, CGroup) and e.open.text == "{"), None)
    if brace is None:
        return None
    fields: list[str] = []
    seg: list = []
    for e in list(brace.children) + [None]:
        if e is None or (isinstance(e, CToken) and e.text == ";"):
            toks_only = [c for c in seg if isinstance(c, CToken)]
            if toks_only:
                words = [c.text for c in toks_only if c.kind in ("keyword", "ident")]
                stars = sum(1 for c in toks_only if c.text == "*")
                if len(words) >= 2:
                    try:
                        ty = _map_type(words[:-1], stars)
                    except UnsupportedConstruct:
                        return None
                    fields.append(f"    pub {words[-1]}: {ty},")
            seg = []
        else:
            seg.append(e)
    body = "\n".join(fields)
    return CatalogEntry(name, "type", f"#[repr(C)]\npub struct {name} {{\n{body}\n}}")


def _typedef_entry(name: str, decl_text: str) -> CatalogEntry | None:
    toks = [
        t for t in c_tokenize(decl_text, "<decl>")
        if t.kind in ("keyword", "ident", "punct")
    ]
    words = [t.text for t in toks if t.kind in ("keyword", "ident")
             and t.text not in ("typedef",) and t.text != name]
    stars = sum(1 for t in toks if t.text == "*")
    if any(t.text in ("struct", "union", "enum") for t in toks):
        return None  # handled by the struct path when it has a body
    try:
        ty = _map_type(words, stars)
    except UnsupportedConstruct:
        return None
    return CatalogEntry(name, "type", f"pub type {name} = {ty};")


def _macro_entry(name: str, body: str) -> CatalogEntry | None:
    literal = body.strip().strip("()").strip()
    if re.fullmatch(r"-?\d+", literal):
        v = int(literal)
        if v < 0:
            ty = "i32" if v >= -(2**31) else "i64"
        else:
            ty = "u32" if v < 2**32 else "u64"
        return CatalogEntry(name, "macro-const", f"pub const {name}: {ty} = {literal};")
    if re.fullmatch(r"0[xX][0-9a-fA-F]+", literal):
        ty = "u32" if int(literal, 16) < 2**32 else "u64"
        return CatalogEntry(name, "macro-const", f"pub const {name}: {ty} = {literal};")
    return None


def _variable_entry(name: str, decl_text: str) -> CatalogEntry | None:
    toks = [t for t in c_tokenize(decl_text, "<decl>") if t.kind != "comment"]
    words: list[str] = []
    stars = 0
    init: str | None = None
    seen_name = False
    for i, t in enumerate(toks):
        if t.kind in ("keyword", "ident") and t.text != name and not seen_name:
            if t.text not in ("extern",):
                words.append(t.text)
        elif t.text == "*":
            stars += 1
        elif t.kind == "ident" and t.text == name:
            seen_name = True
        elif t.text == "=" and seen_name:
            init = "".join(x.text for x in toks[i + 1 :] if x.text != ";")
            break
    try:
        ty = _map_type([w for w in words if w not in ("const", "static", "volatile")], stars)
    except UnsupportedConstruct:
        return None
    is_const = "const" in words
    default = {"bool": "false", "f32": "0.0", "f64": "0.0"}.get(ty, "0")
    value = init if init is not None else default
    kw = "static" if is_const else "static mut"
    return CatalogEntry(name, "variable", f"pub {kw} {name}: {ty} = {value};")


def _extern_fn_entry(name: str, proto_text: str) -> CatalogEntry | None:
    try:
        toks = [t for t in c_tokenize(proto_text, "<proto>") if t.kind != "comment"]
        elems = build_groups(toks, "<proto>")
    except Exception:
        return None
    paren = next((e for e in elems if isinstance(e, CGroup) and e.open.text == "("), None)
    if paren is None:
        return None
    idx = elems.index(paren)
    ret_words = [
        e.text for e in elems[: idx - 1]
        if isinstance(e, CToken) and e.kind in ("keyword", "ident")
        and e.text not in ("extern", "static", "inline")
    ]
    ret_stars = sum(1 for e in elems[: idx - 1] if isinstance(e, CToken) and e.text == "*")
    params: list[str] = []
    chunk: list = []
    for e in list(paren.children) + [None]:
        if e is None or (isinstance(e, CToken) and e.text == ","):
            toks_only = [c for c in chunk if isinstance(c, CToken)]
            if toks_only and not (len(toks_only) == 1 and toks_only[0].text == "void"):
                words = [c.text for c in toks_only if c.kind in ("keyword", "ident")]
                stars = sum(1 for c in toks_only if c.text == "*")
                if len(words) < 2:
                    return None
                try:
                    ty = _map_type(words[:-1], stars)
                except UnsupportedConstruct:
                    return None
                params.append(f"{words[-1]}: {ty}")
            chunk = []
        else:
            chunk.append(e)
    try:
        ret = _map_type(ret_words or ["void"], ret_stars)
    except UnsupportedConstruct:
        return None
    sig = f"pub fn {name}({', '.join(params)})" + ("" if ret == "()" else f" -> {ret}")
    return CatalogEntry(name, "extern-fn", f'extern "C" {{\n    {sig};\n}}')


def generate_catalog(module: ModuleIR) -> ContextCatalog:
    """Simplified binding generation over the parsed module: repr(C) structs,
    object macros as constants, globals as statics, extern prototypes."""
    entries: dict[tuple[str, str], CatalogEntry] = {}
    module_fns = {u.name for u in module.functions}

    def put(e: CatalogEntry | None):
        if e is not None and (e.name, e.kind) not in entries:
            entries[(e.name, e.kind)] = e

    for d in module.declarations:
        for name, kind in d.entries:
            if kind == "macro" and not d.function_like:
                put(_macro_entry(name, d.macro_body))
            elif kind == "type":
                if "{" in d.text:
                    put(_struct_entry(name, d.text))
                else:
                    put(_typedef_entry(name, d.text))
            elif kind == "variable":
                put(_variable_entry(name, d.text))
            elif kind == "prototype" and name not in module_fns:
                put(_extern_fn_entry(name, d.text))
    ordered = sorted(entries.values(), key=lambda e: (e.name, e.kind))
    return ContextCatalog(tuple(ordered))
