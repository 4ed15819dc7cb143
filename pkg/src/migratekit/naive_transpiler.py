"""Rule-based C-to-unsafe-Rust fallback for the mini-C subset.

Straight-line statement mapping only: integer arithmetic, calls, assignments,
if/else, while, simple for loops, returns. Anything outside the subset raises
UnsupportedConstruct so the caller can fall back to an external store.
"""

from __future__ import annotations

from .c_frontend import CGroup, FunctionUnit, build_groups
from .c_lexer import CToken, tokenize
from .errors import MigrateKitError

_TYPE_MAP = {
    ("void",): "()",
    ("char",): "i8",
    ("signed", "char"): "i8",
    ("unsigned", "char"): "u8",
    ("short",): "i16",
    ("unsigned", "short"): "u16",
    ("int",): "i32",
    ("signed",): "i32",
    ("signed", "int"): "i32",
    ("unsigned",): "u32",
    ("unsigned", "int"): "u32",
    ("long",): "i64",
    ("long", "int"): "i64",
    ("long", "long"): "i64",
    ("unsigned", "long"): "u64",
    ("unsigned", "long", "long"): "u64",
    ("unsigned", "long", "int"): "u64",
    ("float",): "f32",
    ("double",): "f64",
    ("size_t",): "usize",
    ("_Bool",): "bool",
    ("bool",): "bool",
    ("u8",): "u8", ("u16",): "u16", ("u32",): "u32", ("u64",): "u64",
    ("s8",): "i8", ("s16",): "i16", ("s32",): "i32", ("s64",): "i64",
}
_SKIP_QUALS = {"const", "static", "volatile", "register", "inline", "extern"}
_PASSTHROUGH_OPS = {
    "+", "-", "*", "/", "%", "<<", ">>", "&", "|", "^", "&&", "||",
    "==", "!=", "<", ">", "<=", ">=", "!", "~", ",",
}


class UnsupportedConstruct(MigrateKitError):
    """C construct outside what the naive transpiler maps."""


def _map_type(words: list[str], stars: int) -> str:
    words = [w for w in words if w not in _SKIP_QUALS]
    base = _TYPE_MAP.get(tuple(words))
    if base is None:
        if len(words) == 1:
            base = words[0]  # typedef or struct name carried through
        else:
            raise UnsupportedConstruct(f"unmapped C type: {' '.join(words)}")
    out = base
    for _ in range(stars):
        out = f"*mut {out}"
    return out


def _default_value(rust_type: str) -> str:
    if rust_type.startswith("*mut") or rust_type.startswith("*const"):
        return "core::ptr::null_mut()"
    if rust_type == "bool":
        return "false"
    if rust_type in ("f32", "f64"):
        return "0.0"
    return "0"


def _split_commas(elems):
    chunks, cur = [], []
    for e in elems:
        if isinstance(e, CToken) and e.text == ",":
            chunks.append(cur)
            cur = []
        else:
            cur.append(e)
    if cur:
        chunks.append(cur)
    return chunks


def _expr(elems) -> str:
    """Translate an expression element sequence; C and Rust mostly coincide."""
    out: list[str] = []
    seq = list(elems)
    i = 0
    while i < len(seq):
        e = seq[i]
        if isinstance(e, CGroup):
            if e.open.text == "(":
                inner = [c for c in e.children]
                words = [
                    c.text
                    for c in inner
                    if isinstance(c, CToken) and c.kind in ("keyword", "ident")
                ]
                only_type = inner and all(
                    isinstance(c, CToken)
                    and (
                        (c.kind == "keyword" and c.text not in ("sizeof",))
                        or c.kind == "ident"
                        or c.text == "*"
                    )
                    for c in inner
                ) and tuple(w for w in words if w not in _SKIP_QUALS) in _TYPE_MAP
                if only_type and i + 1 < len(seq):
                    # C cast: (type) expr  ->  (expr as type)
                    stars = sum(
                        1 for c in inner if isinstance(c, CToken) and c.text == "*"
                    )
                    ty = _map_type(words, stars)
                    rest = _expr([seq[i + 1]])
                    out.append(f"({rest} as {ty})")
                    i += 2
                    continue
                out.append(f"({_expr(e.children)})")
            elif e.open.text == "[":
                out.append(f"[{_expr(e.children)}]")
            else:
                raise UnsupportedConstruct("block in expression")
            i += 1
            continue
        t = e
        if t.kind in ("number", "string", "char"):
            out.append(t.text)
        elif t.kind == "ident":
            out.append(t.text)
        elif t.kind == "keyword":
            if t.text == "sizeof":
                raise UnsupportedConstruct("sizeof")
            raise UnsupportedConstruct(f"keyword `{t.text}` in expression")
        elif t.kind == "punct":
            if t.text in _PASSTHROUGH_OPS or t.text == "=" or t.text.endswith("="):
                out.append(t.text)
            else:
                raise UnsupportedConstruct(f"operator `{t.text}`")
        i += 1
    return " ".join(out)


def _condition(elems) -> str:
    txt = _expr(elems)
    comparator = any(
        isinstance(e, CToken) and e.text in ("==", "!=", "<", ">", "<=", ">=", "&&", "||", "!")
        for e in elems
    )
    return txt if comparator else f"({txt}) != 0"


def _is_decl(seg) -> tuple[list[str], int, list] | None:
    words: list[str] = []
    i = 0
    while i < len(seg) and isinstance(seg[i], CToken) and (
        (seg[i].kind == "keyword" and seg[i].text not in ("return", "if", "while", "for", "do", "else", "switch", "break", "continue", "goto"))
        or (seg[i].kind == "ident" and not words and len(seg) > i + 1
            and isinstance(seg[i + 1], CToken) and seg[i + 1].kind in ("ident",))
    ):
        words.append(seg[i].text)
        i += 1
    if not words:
        return None
    stars = 0
    while i < len(seg) and isinstance(seg[i], CToken) and seg[i].text == "*":
        stars += 1
        i += 1
    if i < len(seg) and isinstance(seg[i], CToken) and seg[i].kind == "ident":
        if tuple(w for w in words if w not in _SKIP_QUALS) in _TYPE_MAP or stars:
            return words, stars, seg[i:]
    return None


def _stmt_lines(seg, ret_type: str, indent: int, out: list[str]):
    pad = "    " * indent
    if not seg:
        return
    head = seg[0]
    decl = _is_decl(seg)
    if decl is not None:
        words, stars, rest = decl
        name = rest[0].text
        ty = _map_type(words, stars)
        if len(rest) > 1 and isinstance(rest[1], CToken) and rest[1].text == "=":
            out.append(f"{pad}let mut {name}: {ty} = {_expr(rest[2:])};")
        elif len(rest) == 1:
            out.append(f"{pad}let mut {name}: {ty} = {_default_value(ty)};")
        else:
            raise UnsupportedConstruct("complex declarator")
        return
    if isinstance(head, CToken) and head.kind == "keyword":
        if head.text == "return":
            if len(seg) == 1:
                out.append(f"{pad}return;")
            else:
                out.append(f"{pad}return {_expr(seg[1:])};")
            return
        if head.text in ("break", "continue"):
            out.append(f"{pad}{head.text};")
            return
        raise UnsupportedConstruct(f"statement `{head.text}`")
    # x++; / x--;
    if (
        len(seg) == 2
        and isinstance(seg[0], CToken)
        and seg[0].kind == "ident"
        and isinstance(seg[1], CToken)
        and seg[1].text in ("++", "--")
    ):
        op = "+=" if seg[1].text == "++" else "-="
        out.append(f"{pad}{seg[0].text} {op} 1;")
        return
    out.append(f"{pad}{_expr(seg)};")


def _block_lines(group: CGroup, ret_type: str, indent: int, out: list[str]):
    pad = "    " * indent
    elems = list(group.children)
    i = 0
    seg: list = []
    while i < len(elems):
        e = elems[i]
        if isinstance(e, CToken) and e.text == ";":
            _stmt_lines(seg, ret_type, indent, out)
            seg = []
            i += 1
            continue
        if isinstance(e, CToken) and e.kind == "keyword" and e.text in ("if", "while", "for") and not seg:
            kw = e.text
            cond_group = elems[i + 1] if i + 1 < len(elems) else None
            body = elems[i + 2] if i + 2 < len(elems) else None
            if not (isinstance(cond_group, CGroup) and cond_group.open.text == "("):
                raise UnsupportedConstruct(f"`{kw}` without parenthesized header")
            if not (isinstance(body, CGroup) and body.open.text == "{"):
                raise UnsupportedConstruct(f"`{kw}` body must be a braced block")
            if kw == "for":
                init, cond, step = [], [], []
                bucket = init
                for c in cond_group.children:
                    if isinstance(c, CToken) and c.text == ";":
                        bucket = cond if bucket is init else step
                        continue
                    bucket.append(c)
                _stmt_lines(init, ret_type, indent, out)
                out.append(f"{pad}while {_condition(cond)} {{")
                _block_lines(body, ret_type, indent + 1, out)
                _stmt_lines(step, ret_type, indent + 1, out)
                out.append(f"{pad}}}")
                i += 3
                continue
            out.append(f"{pad}{'if' if kw == 'if' else 'while'} {_condition(cond_group.children)} {{")
            _block_lines(body, ret_type, indent + 1, out)
            out.append(f"{pad}}}")
            i += 3
            # optional else / else-if chain
            while (
                kw == "if"
                and i < len(elems)
                and isinstance(elems[i], CToken)
                and elems[i].kind == "keyword"
                and elems[i].text == "else"
            ):
                if (
                    i + 1 < len(elems)
                    and isinstance(elems[i + 1], CToken)
                    and elems[i + 1].kind == "keyword"
                    and elems[i + 1].text == "if"
                ):
                    cg, bg = elems[i + 2], elems[i + 3]
                    out.append(f"{pad}else if {_condition(cg.children)} {{")
                    _block_lines(bg, ret_type, indent + 1, out)
                    out.append(f"{pad}}}")
                    i += 4
                else:
                    bg = elems[i + 1]
                    if not (isinstance(bg, CGroup) and bg.open.text == "{"):
                        raise UnsupportedConstruct("`else` body must be a braced block")
                    out.append(f"{pad}else {{")
                    _block_lines(bg, ret_type, indent + 1, out)
                    out.append(f"{pad}}}")
                    i += 2
            continue
        seg.append(e)
        i += 1
    if seg:
        _stmt_lines(seg, ret_type, indent, out)


def naive_transpile(unit: FunctionUnit) -> str:
    """Produce a `pub unsafe fn` mirroring the C function, statement by
    statement."""
    toks = [t for t in tokenize(unit.body_text, unit.file) if t.kind != "comment"]
    elems = build_groups(toks, unit.file)
    body = None
    for e in reversed(elems):
        if isinstance(e, CGroup) and e.open.text == "{":
            body = e
            break
    if body is None:
        raise UnsupportedConstruct("no function body")
    sig = [e for e in elems[: elems.index(body)]]
    if len(sig) < 2 or not isinstance(sig[-1], CGroup):
        raise UnsupportedConstruct("unrecognized signature")
    params_group: CGroup = sig[-1]
    name_tok = sig[-2]
    ret_words = [
        e.text
        for e in sig[:-2]
        if isinstance(e, CToken) and e.kind in ("keyword", "ident") and e.text not in _SKIP_QUALS
    ]
    ret_stars = sum(1 for e in sig[:-2] if isinstance(e, CToken) and e.text == "*")
    ret_type = _map_type(ret_words or ["void"], ret_stars)

    params: list[str] = []
    for chunk in _split_commas(list(params_group.children)):
        toks_only = [c for c in chunk if isinstance(c, CToken)]
        if len(toks_only) == 1 and toks_only[0].text == "void":
            continue
        words = [c.text for c in chunk if isinstance(c, CToken) and c.kind in ("keyword", "ident")]
        stars = sum(1 for c in chunk if isinstance(c, CToken) and c.text == "*")
        if len(words) < 2:
            raise UnsupportedConstruct("unnamed parameter")
        pname = words[-1]
        ty = _map_type(words[:-1], stars)
        params.append(f"mut {pname}: {ty}")

    lines: list[str] = []
    ret = "" if ret_type == "()" else f" -> {ret_type}"
    lines.append(f"pub unsafe fn {unit.name}({', '.join(params)}){ret} {{")
    _block_lines(body, ret_type, 1, lines)
    lines.append("}")
    return "\n".join(lines)
