"""Statement counting for C bodies, mirroring the Rust-side definition.

Statements are parser-level: `;` tokens directly inside brace groups (so
for-loop headers do not inflate the count) plus control-structure heads.
"""

from __future__ import annotations

from .c_frontend import CGroup, build_groups
from .c_lexer import tokenize
from .errors import ParseError
from . import rust_syntax

_C_CONTROL = frozenset(["if", "while", "for", "do", "switch"])


def count_statements(c_text: str) -> int:
    try:
        toks = [t for t in tokenize(c_text, "<c>") if t.kind != "comment"]
        elems = build_groups(toks, "<c>")
    except ParseError:
        return 0

    def walk(children, in_brace: bool) -> int:
        total = 0
        for e in children:
            if isinstance(e, CGroup):
                total += walk(e.children, e.open.text == "{")
            elif e.kind == "punct" and e.text == ";":
                total += 1 if in_brace else 0
            elif e.kind == "keyword" and e.text in _C_CONTROL:
                total += 1
        return total

    return walk(elems, False)


def count_rust_statements(rust_text: str) -> int:
    return rust_syntax.count_statements(rust_text)
