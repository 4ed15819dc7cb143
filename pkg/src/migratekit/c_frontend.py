"""C module parsing: function extraction and call-graph construction.

Supported C subset: function definitions, prototypes, structs/unions/enums,
typedefs, object-like and function-like macros (no token pasting), static and
global variables. Anything else raises ParseError instead of mis-parsing.
Each top-level definition must start on its own line (spans are line-based).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import networkx as nx

from .c_lexer import C_KEYWORDS, CToken, tokenize
from .errors import IoError, ParseError

_TYPE_KEYWORDS = frozenset(
    "void char short int long float double signed unsigned _Bool".split()
)
_QUALIFIERS = frozenset("const volatile static extern register inline auto restrict".split())
_TAG_KEYWORDS = frozenset("struct union enum".split())
_STMT_KEYWORDS = frozenset(
    "if else while for do switch case default return goto break continue sizeof".split()
)

_DEFINE_RE = re.compile(r"#\s*define\s+([A-Za-z_]\w*)(\()?")
_INCLUDE_RE = re.compile(r'#\s*include\s+[<"]([^>"]+)[>"]')


@dataclass(frozen=True)
class SourceFile:
    path: str
    text: str
    kind: str  # source | header


@dataclass(frozen=True)
class CGroup:
    """A balanced (), [] or {} token group."""

    open: CToken
    close: CToken
    children: tuple

    @property
    def line(self) -> int:
        return self.open.line

    def flat(self) -> list[CToken]:
        out = [self.open]
        for c in self.children:
            out.extend(c.flat() if isinstance(c, CGroup) else [c])
        out.append(self.close)
        return out


@dataclass(frozen=True)
class FunctionUnit:
    id: str
    name: str
    file: str
    body_span: tuple[int, int]  # (start line, end line), 1-based inclusive
    body_text: str
    locals: frozenset[str]
    referenced: frozenset[str]
    line_count: int
    signature: str  # declaration text through the closing parameter paren

    def __post_init__(self):
        assert not (self.locals & self.referenced)
        assert self.line_count == self.body_span[1] - self.body_span[0] + 1 >= 1


@dataclass(frozen=True)
class ModuleDecl:
    """A module-level declaration that is not a function definition."""

    file: str
    span: tuple[int, int]
    text: str
    entries: tuple[tuple[str, str], ...]  # (name, kind) with kind in {macro,type,variable,prototype}
    function_like: bool = False
    include_target: str | None = None
    macro_body: str = ""


@dataclass
class ModuleIR:
    files: list[SourceFile]
    functions: list[FunctionUnit]
    declarations: list[ModuleDecl]
    # name -> unit ids, used for call resolution and global search
    fn_index: dict[str, list[str]] = field(default_factory=dict)

    def unit(self, unit_id: str) -> FunctionUnit:
        for u in self.functions:
            if u.id == unit_id:
                return u
        raise KeyError(unit_id)

    def macro_names(self) -> set[str]:
        return {n for d in self.declarations for n, k in d.entries if k == "macro"}

    def type_names(self) -> set[str]:
        return {n for d in self.declarations for n, k in d.entries if k == "type"}


@dataclass(frozen=True)
class CallGraph:
    nodes: frozenset[str]
    edges: frozenset[tuple[str, str]]
    external_calls: dict[str, frozenset[str]]
    scc_order: tuple[tuple[str, ...], ...]  # leaf SCCs first; members (file, line)-ordered
    via_macro_edges: tuple[tuple[str, str], ...] = ()  # (caller id, called name) from macro bodies


def _line_slice(text: str, start: int, end: int) -> str:
    lines = text.splitlines(keepends=True)
    return "".join(lines[start - 1 : end])


def build_groups(tokens: list[CToken], file: str) -> list:
    """Nest a token stream into balanced delimiter groups."""
    pairs = {"(": ")", "[": "]", "{": "}"}
    stack: list[list] = [[]]
    openers: list[CToken] = []
    for t in tokens:
        if t.kind == "punct" and t.text in pairs:
            openers.append(t)
            stack.append([])
        elif t.kind == "punct" and t.text in (")", "]", "}"):
            if not openers:
                raise ParseError(f"unbalanced `{t.text}`", file, t.line)
            o = openers.pop()
            if pairs[o.text] != t.text:
                raise ParseError(
                    f"mismatched `{o.text}` closed by `{t.text}`", file, t.line
                )
            grp = CGroup(o, t, tuple(stack.pop()))
            stack[-1].append(grp)
        else:
            stack[-1].append(t)
    if openers:
        raise ParseError(f"unclosed `{openers[-1].text}`", file, openers[-1].line)
    return stack[0]


def _flat_tokens(elems) -> list[CToken]:
    out: list[CToken] = []
    for e in elems:
        out.extend(e.flat() if isinstance(e, CGroup) else [e])
    return out


def _is_fn_definition(buf: list) -> bool:
    if len(buf) < 3:
        return False
    body, params, name = buf[-1], buf[-2], buf[-3]
    if not (isinstance(body, CGroup) and body.open.text == "{"):
        return False
    if not (isinstance(params, CGroup) and params.open.text == "("):
        return False
    if not (isinstance(name, CToken) and name.kind == "ident"):
        return False
    first = buf[0]
    if isinstance(first, CToken) and first.kind == "keyword" and first.text == "typedef":
        return False
    for e in buf[:-1]:
        if isinstance(e, CToken) and e.kind == "punct" and e.text == "=":
            return False
    return True


def _split_top_level(elems, file: str) -> list[tuple[str, list]]:
    """Split top-level elements into ('pp'|'fn'|'decl', element list) constructs."""
    constructs: list[tuple[str, list]] = []
    i = 0
    while i < len(elems):
        e = elems[i]
        if isinstance(e, CToken) and e.kind == "pp":
            constructs.append(("pp", [e]))
            i += 1
            continue
        if isinstance(e, CToken) and e.kind == "punct" and e.text == ";":
            i += 1  # stray empty declaration
            continue
        buf: list = []
        j = i
        done = False
        while j < len(elems):
            e2 = elems[j]
            if isinstance(e2, CToken) and e2.kind == "pp" and buf:
                raise ParseError(
                    "preprocessor directive inside a declaration is outside the "
                    "supported subset",
                    file,
                    e2.line,
                )
            buf.append(e2)
            j += 1
            if isinstance(e2, CToken) and e2.kind == "punct" and e2.text == ";":
                constructs.append(("decl", buf))
                done = True
                break
            if isinstance(e2, CGroup) and e2.open.text == "{" and _is_fn_definition(buf):
                constructs.append(("fn", buf))
                done = True
                break
        if not done:
            first = _flat_tokens(buf)[0]
            raise ParseError("unterminated declaration", file, first.line)
        i = j
    return constructs


def _split_commas(elems) -> list[list]:
    chunks: list[list] = [[]]
    for e in elems:
        if isinstance(e, CToken) and e.kind == "punct" and e.text == ",":
            chunks.append([])
        else:
            chunks[-1].append(e)
    return [c for c in chunks if c]


def _strip_type_prefix(elems) -> tuple[list, list]:
    """Split a declaration into (type prefix, declarator part).

    A lone leading identifier is consumed as a typedef name when a declarator
    identifier still follows (the classic `size_t n;` two-identifier rule).
    """
    i = 0
    n = len(elems)
    saw_tag = False
    while i < n:
        e = elems[i]
        if isinstance(e, CToken) and e.kind == "keyword" and e.text in _TAG_KEYWORDS:
            i += 1
            saw_tag = True
            if i < n and isinstance(elems[i], CToken) and elems[i].kind == "ident":
                i += 1
            if i < n and isinstance(elems[i], CGroup) and elems[i].open.text == "{":
                i += 1
            continue
        if isinstance(e, CToken) and e.kind == "keyword" and (
            e.text in _TYPE_KEYWORDS or e.text in _QUALIFIERS
        ):
            i += 1
            continue
        break
    if not saw_tag and i < n and isinstance(elems[i], CToken) and elems[i].kind == "ident":
        rest = elems[i + 1 :]
        rest_has_name = any(
            isinstance(r, CToken) and r.kind == "ident" for r in rest
        ) or any(isinstance(r, CGroup) and r.open.text == "(" for r in rest)
        only_quals_so_far = all(
            isinstance(p, CToken) and p.kind == "keyword" and p.text in _QUALIFIERS
            for p in elems[:i]
        )
        if rest_has_name and (i == 0 or only_quals_so_far):
            # `mytype x`, `mytype *x`, `const mytype x`
            nxt = next(
                (
                    r
                    for r in rest
                    if not (isinstance(r, CToken) and r.kind == "punct" and r.text == "*")
                ),
                None,
            )
            if isinstance(nxt, CToken) and nxt.kind == "ident" or isinstance(nxt, CGroup):
                i += 1
    return elems[:i], elems[i:]


def _declarator_names(decl_elems) -> list[tuple[str, bool]]:
    """Names declared by a declarator list. Returns (name, is_function_shaped)."""
    names: list[tuple[str, bool]] = []
    for chunk in _split_commas(decl_elems):
        # drop leading stars/qualifiers
        k = 0
        while k < len(chunk) and (
            isinstance(chunk[k], CToken)
            and (
                (chunk[k].kind == "punct" and chunk[k].text == "*")
                or (chunk[k].kind == "keyword" and chunk[k].text in _QUALIFIERS)
            )
        ):
            k += 1
        if k >= len(chunk):
            continue
        head = chunk[k]
        if isinstance(head, CGroup) and head.open.text == "(":
            # function pointer declarator: (*name)(args)
            inner = [
                t
                for t in head.children
                if isinstance(t, CToken) and t.kind == "ident"
            ]
            if inner:
                names.append((inner[0].text, False))
            continue
        if isinstance(head, CToken) and head.kind == "ident":
            is_fn = (
                k + 1 < len(chunk)
                and isinstance(chunk[k + 1], CGroup)
                and chunk[k + 1].open.text == "("
            )
            names.append((head.text, is_fn))
    return names


def _param_names(params: CGroup) -> set[str]:
    names: set[str] = set()
    for chunk in _split_commas(list(params.children)):
        toks = [e for e in chunk if isinstance(e, CToken)]
        if len(toks) == 1 and toks[0].text in ("void", "..."):
            continue
        _, decl = _strip_type_prefix(chunk)
        for name, _ in _declarator_names(decl):
            names.add(name)
        if not decl:
            # unnamed parameter, e.g. `int` in a prototype-style definition
            continue
    return names


def _is_declaration_start(seg) -> bool:
    toks = [e for e in seg if isinstance(e, (CToken, CGroup))]
    if not toks:
        return False
    first = toks[0]
    if isinstance(first, CGroup):
        return False
    if first.kind == "keyword":
        return first.text in _TYPE_KEYWORDS or first.text in _TAG_KEYWORDS or first.text in (
            "const",
            "static",
            "register",
            "volatile",
            "unsigned",
            "signed",
            "typedef",
        )
    if first.kind != "ident":
        return False
    # `name name`, `name *name`, `name **name` pattern
    rest = toks[1:]
    k = 0
    while k < len(rest) and isinstance(rest[k], CToken) and rest[k].kind == "punct" and rest[k].text == "*":
        k += 1
    return k > 0 and k < len(rest) and isinstance(rest[k], CToken) and rest[k].kind == "ident" or (
        k == 0 and rest and isinstance(rest[0], CToken) and rest[0].kind == "ident"
    )


def _collect_block_locals(group: CGroup, locals_out: set[str]):
    """Declared names and labels at every nesting depth of a block."""
    segs: list[list] = [[]]
    for e in group.children:
        if isinstance(e, CToken) and e.kind == "punct" and e.text == ";":
            segs.append([])
            continue
        segs[-1].append(e)
        if isinstance(e, CGroup) and e.open.text == "{":
            segs.append([])
    for seg in segs:
        seg = [e for e in seg if not (isinstance(e, CToken) and e.kind == "comment")]
        if not seg:
            continue
        head = seg[0]
        if isinstance(head, CToken) and head.kind == "keyword" and head.text == "for":
            for e in seg:
                if isinstance(e, CGroup) and e.open.text == "(":
                    init: list = []
                    for c in e.children:
                        if isinstance(c, CToken) and c.kind == "punct" and c.text == ";":
                            break
                        init.append(c)
                    if _is_declaration_start(init):
                        _, decl = _strip_type_prefix(init)
                        locals_out.update(n for n, _ in _declarator_names(decl))
                    break
        elif _is_declaration_start(seg) and not any(
            isinstance(e, CGroup) and e.open.text == "{" for e in seg
        ):
            _, decl = _strip_type_prefix(seg)
            locals_out.update(n for n, _ in _declarator_names(decl))
        if (
            len(seg) >= 2
            and isinstance(seg[0], CToken)
            and seg[0].kind == "ident"
            and isinstance(seg[1], CToken)
            and seg[1].kind == "punct"
            and seg[1].text == ":"
        ):
            locals_out.add(seg[0].text)  # goto label
    for e in group.children:
        if isinstance(e, CGroup):
            _collect_block_locals(e, locals_out)


def _member_positions(tokens: list[CToken]) -> set[int]:
    """Indices of identifiers reached via `.` or `->` (struct members)."""
    out = set()
    for i, t in enumerate(tokens):
        if t.kind == "ident" and i > 0 and tokens[i - 1].kind == "punct" and tokens[
            i - 1
        ].text in (".", "->"):
            out.add(i)
    return out


def parse_source_file(sf: SourceFile) -> tuple[list[FunctionUnit], list[ModuleDecl]]:
    tokens = tokenize(sf.text, sf.path)
    structural = [t for t in tokens if t.kind != "comment"]
    elems = build_groups(structural, sf.path)
    constructs = _split_top_level(elems, sf.path)

    units: list[FunctionUnit] = []
    decls: list[ModuleDecl] = []
    used_lines: set[int] = set()

    def claim(span: tuple[int, int], what: str):
        rng = set(range(span[0], span[1] + 1))
        if rng & used_lines:
            raise ParseError(
                f"{what} shares a source line with another top-level definition",
                sf.path,
                span[0],
            )
        used_lines.update(rng)

    for kind, buf in constructs:
        flat = _flat_tokens(buf)
        start_line, end_line = flat[0].line, flat[-1].line
        text = _line_slice(sf.text, start_line, end_line)
        if kind == "pp":
            pp = flat[0]
            m = _DEFINE_RE.match(pp.text)
            if m:
                body = pp.text[m.end() :]
                if m.group(2):  # function-like: body starts after the params
                    close = body.find(")")
                    body = body[close + 1 :] if close != -1 else body
                decls.append(
                    ModuleDecl(
                        sf.path,
                        (start_line, start_line + pp.text.count("\n")),
                        pp.text,
                        ((m.group(1), "macro"),),
                        function_like=bool(m.group(2)),
                        macro_body=body,
                    )
                )
                continue
            m = _INCLUDE_RE.match(pp.text)
            decls.append(
                ModuleDecl(
                    sf.path,
                    (start_line, start_line + pp.text.count("\n")),
                    pp.text,
                    (),
                    include_target=m.group(1) if m else None,
                )
            )
            continue
        if kind == "fn":
            name_tok, params, body = buf[-3], buf[-2], buf[-1]
            claim((start_line, end_line), f"function `{name_tok.text}`")
            locs: set[str] = set(_param_names(params))
            _collect_block_locals(body, locs)
            body_toks = body.flat()
            ref: set[str] = set()
            for t in _flat_tokens(buf[:-1]):
                # signature tokens, minus the declarator occurrence itself
                if t.kind == "ident" and t is not name_tok:
                    ref.add(t.text)
            for t in body_toks:
                if t.kind == "ident":
                    ref.add(t.text)  # self-recursion keeps the own name referenced
            ref -= locs
            ref -= C_KEYWORDS
            signature = sf.text[flat[0].offset : params.close.offset + 1]
            units.append(
                FunctionUnit(
                    id=f"{sf.path}::{name_tok.text}",
                    name=name_tok.text,
                    file=sf.path,
                    body_span=(start_line, end_line),
                    body_text=text,
                    locals=frozenset(locs),
                    referenced=frozenset(ref),
                    line_count=end_line - start_line + 1,
                    signature=signature,
                )
            )
            continue
        # plain declaration
        entries: list[tuple[str, str]] = []
        first = buf[0]
        is_typedef = (
            isinstance(first, CToken) and first.kind == "keyword" and first.text == "typedef"
        )
        body_elems = buf[1:] if is_typedef else buf
        tag_kind_elems = body_elems
        # struct/union/enum tag definition or forward declaration
        for idx, e in enumerate(tag_kind_elems):
            if isinstance(e, CToken) and e.kind == "keyword" and e.text in _TAG_KEYWORDS:
                if idx + 1 < len(tag_kind_elems):
                    nxt = tag_kind_elems[idx + 1]
                    after = tag_kind_elems[idx + 2] if idx + 2 < len(tag_kind_elems) else None
                    if isinstance(nxt, CToken) and nxt.kind == "ident":
                        defines_tag = isinstance(after, CGroup) and after.open.text == "{"
                        forward = isinstance(after, CToken) and after.text == ";"
                        if defines_tag or forward:
                            entries.append((nxt.text, "type"))
                break
        prefix, decl_part = _strip_type_prefix(body_elems)
        names = _declarator_names(decl_part)
        for name, fn_shaped in names:
            if is_typedef:
                entries.append((name, "type"))
            elif fn_shaped:
                entries.append((name, "prototype"))
            else:
                entries.append((name, "variable"))
        decls.append(
            ModuleDecl(sf.path, (start_line, end_line), text, tuple(dict.fromkeys(entries)))
        )
    return units, decls


def parse_module(paths: list[str | Path]) -> ModuleIR:
    """Parse `.c`/`.h` files (or directory roots, recursive) into a ModuleIR."""
    expanded: list[Path] = []
    for p in paths:
        p = Path(p)
        if p.is_dir():
            expanded.extend(sorted(p.rglob("*.c")) + sorted(p.rglob("*.h")))
        else:
            expanded.append(p)
    expanded = sorted(dict.fromkeys(expanded), key=lambda q: (q.suffix != ".c", str(q)))
    files: list[SourceFile] = []
    seen: set[str] = set()
    for p in expanded:
        try:
            text = p.read_text(encoding="utf-8")
        except OSError as e:
            raise IoError(f"cannot read {p}: {e}") from e
        key = str(p)
        if key in seen:
            continue
        seen.add(key)
        if not text:
            raise ParseError("empty source file", key, 1)
        files.append(SourceFile(key, text, "source" if p.suffix == ".c" else "header"))
    if not any(f.kind == "source" for f in files):
        raise IoError("no source files given")

    functions: list[FunctionUnit] = []
    declarations: list[ModuleDecl] = []
    for sf in files:
        units, decls = parse_source_file(sf)
        functions.extend(units)
        declarations.extend(decls)
    ir = ModuleIR(files, functions, declarations)
    for u in functions:
        ir.fn_index.setdefault(u.name, []).append(u.id)
    return ir


def _body_group(unit: FunctionUnit) -> CGroup:
    toks = [t for t in tokenize(unit.body_text, unit.file) if t.kind != "comment"]
    elems = build_groups(toks, unit.file)
    for e in reversed(elems):
        if isinstance(e, CGroup) and e.open.text == "{":
            return e
    raise ParseError("function body not found", unit.file, unit.body_span[0])


def _calls_in(elems) -> list[tuple[str, bool]]:
    """(name, is_member_call) for identifiers immediately applied to arguments."""
    out: list[tuple[str, bool]] = []
    seq = list(elems)
    for i, e in enumerate(seq):
        if (
            isinstance(e, CToken)
            and e.kind == "ident"
            and i + 1 < len(seq)
            and isinstance(seq[i + 1], CGroup)
            and seq[i + 1].open.text == "("
        ):
            member = (
                i > 0
                and isinstance(seq[i - 1], CToken)
                and seq[i - 1].kind == "punct"
                and seq[i - 1].text in (".", "->")
            )
            out.append((e.text, member))
        if isinstance(e, CGroup):
            out.extend(_calls_in(e.children))
    return out


def build_call_graph(module: ModuleIR) -> CallGraph:
    """Edges for calls to module-defined functions; the rest are external."""
    order = {u.id: (u.file, u.body_span[0]) for u in module.functions}
    nodes = frozenset(order)
    edges: set[tuple[str, str]] = set()
    external: dict[str, set[str]] = {u.id: set() for u in module.functions}
    macro_bodies = {
        n: d.macro_body
        for d in module.declarations
        for n, k in d.entries
        if k == "macro"
    }
    via_macro: set[tuple[str, str]] = set()

    def resolve(caller: FunctionUnit, name: str) -> str | None:
        cands = module.fn_index.get(name, [])
        if not cands:
            return None
        same_file = [c for c in cands if c.startswith(caller.file + "::")]
        if same_file:
            return same_file[0]
        return sorted(cands)[0]

    for u in module.functions:
        body = _body_group(u)
        for name, member in _calls_in(body.children):
            if member or name in u.locals or name in C_KEYWORDS:
                if name not in C_KEYWORDS:
                    external[u.id].add(name)
                continue
            target = resolve(u, name)
            if target is not None:
                edges.add((u.id, target))
            else:
                external[u.id].add(name)
        # calls made only inside macros the function expands (flagged, not edges)
        for ref in u.referenced:
            mbody = macro_bodies.get(ref)
            if not mbody:
                continue
            try:
                mtoks = [t for t in tokenize(mbody, "<macro>") if t.kind != "comment"]
                melems = build_groups(mtoks, "<macro>")
            except ParseError:
                continue
            for name, member in _calls_in(melems):
                if not member and name not in C_KEYWORDS:
                    via_macro.add((u.id, name))

    g = nx.DiGraph()
    g.add_nodes_from(nodes)
    g.add_edges_from(edges)
    sccs = [frozenset(c) for c in nx.strongly_connected_components(g)]
    comp_of = {n: i for i, c in enumerate(sccs) for n in c}
    # condensation edges caller-SCC -> callee-SCC
    cedges: dict[int, set[int]] = {i: set() for i in range(len(sccs))}
    indeg = {i: 0 for i in range(len(sccs))}  # pending callee count per SCC
    for a, b in edges:
        ca, cb = comp_of[a], comp_of[b]
        if ca != cb and cb not in cedges[ca]:
            cedges[ca].add(cb)
            indeg[ca] += 1
    callers_of: dict[int, set[int]] = {i: set() for i in range(len(sccs))}
    for a, callees in cedges.items():
        for b in callees:
            callers_of[b].add(a)

    def group_key(i: int):
        return min(order[n] for n in sccs[i])

    ready = sorted((i for i in indeg if indeg[i] == 0), key=group_key)
    ordered: list[tuple[str, ...]] = []
    while ready:
        i = ready.pop(0)
        ordered.append(tuple(sorted(sccs[i], key=lambda n: order[n])))
        changed = False
        for a in callers_of[i]:
            indeg[a] -= 1
            if indeg[a] == 0:
                ready.append(a)
                changed = True
        if changed:
            ready.sort(key=group_key)

    return CallGraph(
        nodes=nodes,
        edges=frozenset(edges),
        external_calls={k: frozenset(v) for k, v in external.items()},
        scc_order=tuple(ordered),
        via_macro_edges=tuple(sorted(via_macro)),
    )


def leaves_first_schedule(graph: CallGraph) -> list[list[str]]:
    """SCC groups, leaf SCCs first; group members ordered by (file, start line)."""
    return [list(g) for g in graph.scc_order]


def callgraph_to_json(graph: CallGraph) -> str:
    payload = {
        "nodes": sorted(graph.nodes),
        "edges": sorted([list(e) for e in graph.edges]),
        "external_calls": {k: sorted(v) for k, v in sorted(graph.external_calls.items())},
        "scc_order": [list(g) for g in graph.scc_order],
        "via_macro_edges": [
            {"caller": a, "callee": b, "via_macro": True} for a, b in graph.via_macro_edges
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
