"""Structural Rust parsing: item splitting, statement counts, unsafe spans.

This is a token-tree parser, not a full grammar: it validates delimiter
nesting and item shape (the level a syntax-retry loop needs), while `rustc`
remains the authority on whether a unit actually compiles.
"""

from __future__ import annotations

from dataclasses import dataclass

from .rust_lexer import RToken, RustLexError, tokenize

_CONTROL_KEYWORDS = frozenset(["if", "while", "loop", "for", "match"])
_ITEM_KEYWORDS = frozenset(
    [
        "fn", "struct", "enum", "union", "trait", "impl", "mod", "use",
        "const", "static", "type", "extern", "macro_rules",
    ]
)


@dataclass(frozen=True)
class SyntaxIssue:
    message: str
    line: int
    col: int


@dataclass(frozen=True)
class RGroup:
    open: RToken
    close: RToken
    children: tuple

    @property
    def line(self) -> int:
        return self.open.line


@dataclass(frozen=True)
class RustItem:
    kind: str
    name: str | None
    text: str
    start_line: int
    end_line: int

    @property
    def key(self) -> str:
        """Dedup identity: the name, or a stable stand-in for unnamed items."""
        if self.name:
            return self.name
        return f"<{self.kind}:{abs(hash(' '.join(self.text.split()))):x}>"


def build_tree(tokens: list[RToken]) -> tuple[list, list[SyntaxIssue]]:
    pairs = {"(": ")", "[": "]", "{": "}"}
    stack: list[list] = [[]]
    openers: list[RToken] = []
    issues: list[SyntaxIssue] = []
    for t in tokens:
        if t.kind == "comment":
            continue
        if t.kind == "punct" and t.text in pairs:
            openers.append(t)
            stack.append([])
        elif t.kind == "punct" and t.text in (")", "]", "}"):
            if not openers:
                issues.append(SyntaxIssue(f"unbalanced `{t.text}`", t.line, t.col))
                return stack[0], issues
            o = openers.pop()
            if pairs[o.text] != t.text:
                issues.append(
                    SyntaxIssue(
                        f"`{o.text}` opened here is closed by `{t.text}`", o.line, o.col
                    )
                )
                return stack[0], issues
            grp = RGroup(o, t, tuple(stack.pop()))
            stack[-1].append(grp)
        else:
            stack[-1].append(t)
    if openers:
        o = openers[-1]
        issues.append(SyntaxIssue(f"unclosed `{o.text}`", o.line, o.col))
    return stack[0], issues


def _is_tok(e, text: str) -> bool:
    return isinstance(e, RToken) and e.text == text


def _skip_generics(elems: list, i: int) -> int:
    """Skip a `<...>` generic group starting at elems[i] if present."""
    if i >= len(elems) or not _is_tok(elems[i], "<"):
        return i
    depth = 0
    while i < len(elems):
        e = elems[i]
        if isinstance(e, RToken) and e.kind == "punct":
            if e.text == "<" or e.text == "<<":
                depth += 2 if e.text == "<<" else 1
            elif e.text == ">" or e.text == ">=":
                depth -= 1
            elif e.text == ">>" or e.text == ">>=":
                depth -= 2
        i += 1
        if depth <= 0:
            break
    return i


def parse_items(text: str) -> tuple[list[RustItem], list[SyntaxIssue]]:
    """Split source text into top-level items; issues carry line/column."""
    try:
        tokens = tokenize(text)
    except RustLexError as e:
        return [], [SyntaxIssue(e.message, e.line, e.col)]
    elems, issues = build_tree(tokens)
    if issues:
        return [], issues
    items: list[RustItem] = []

    def first_token(e) -> RToken:
        return e.open if isinstance(e, RGroup) else e

    def last_token(e) -> RToken:
        return e.close if isinstance(e, RGroup) else e

    def slice_item(kind: str, name: str | None, lo: int, hi: int):
        start = first_token(elems[lo])
        end = last_token(elems[hi])
        items.append(
            RustItem(kind, name, text[start.offset : end.end_offset], start.line, end.line)
        )

    i = 0
    n = len(elems)
    while i < n and not issues:
        start = i
        # attributes (`#[...]` outer, `#![...]` inner) and visibility
        while i < n and _is_tok(elems[i], "#"):
            j = i + 1
            if j < n and _is_tok(elems[j], "!"):
                j += 1
            if j < n and isinstance(elems[j], RGroup) and elems[j].open.text == "[":
                i = j + 1
            else:
                issues.append(
                    SyntaxIssue("malformed attribute", first_token(elems[i]).line,
                                first_token(elems[i]).col)
                )
                break
        if issues or i >= n:
            if i > start and i >= n and not issues:
                slice_item("attr", None, start, n - 1)
            break
        if _is_tok(elems[i], "pub"):
            i += 1
            if i < n and isinstance(elems[i], RGroup) and elems[i].open.text == "(":
                i += 1
        # qualifiers before `fn`/`impl`/`trait`, distinguished from const/static
        # items and extern blocks by lookahead
        qual_seen: list[str] = []
        while i < n and isinstance(elems[i], RToken):
            t = elems[i].text
            nxt = elems[i + 1] if i + 1 < n else None
            if t in ("async",) or (
                t == "const" and isinstance(nxt, RToken) and nxt.text in ("fn", "unsafe", "extern")
            ) or (
                t == "unsafe"
                and (
                    isinstance(nxt, RToken) and nxt.text in ("fn", "impl", "trait", "extern")
                )
            ):
                qual_seen.append(t)
                i += 1
                continue
            if t == "extern" and (
                (isinstance(nxt, RToken) and (nxt.kind == "string" or nxt.text == "fn"))
                or (isinstance(nxt, RGroup) and nxt.open.text == "{")
            ):
                qual_seen.append(t)
                i += 1
                if i < n and isinstance(elems[i], RToken) and elems[i].kind == "string":
                    i += 1
                continue
            break
        if i >= n:
            issues.append(SyntaxIssue("expected item", first_token(elems[start]).line,
                                      first_token(elems[start]).col))
            break
        head = elems[i]
        if isinstance(head, RGroup):
            if head.open.text == "{" and qual_seen and qual_seen[-1] == "extern":
                slice_item("extern-block", None, start, i)
                i += 1
                continue
            issues.append(SyntaxIssue("expected item, found a delimiter group",
                                      head.open.line, head.open.col))
            break
        kw = head.text

        def expect_name(at: int) -> str | None:
            if at < n and isinstance(elems[at], RToken) and elems[at].kind in ("ident", "keyword"):
                return elems[at].text
            return None

        if kw == "fn":
            name = expect_name(i + 1)
            if name is None:
                issues.append(SyntaxIssue("expected function name after `fn`",
                                          head.line, head.col))
                break
            j = _skip_generics(elems, i + 2)
            if not (j < n and isinstance(elems[j], RGroup) and elems[j].open.text == "("):
                issues.append(SyntaxIssue("expected parameter list", head.line, head.col))
                break
            j += 1
            while j < n and not (
                isinstance(elems[j], RGroup) and elems[j].open.text == "{"
            ):
                if _is_tok(elems[j], ";"):
                    break
                j += 1
            if j >= n:
                issues.append(SyntaxIssue("missing function body", head.line, head.col))
                break
            if _is_tok(elems[j], ";"):
                issues.append(SyntaxIssue("function declaration without a body",
                                          first_token(elems[j]).line,
                                          first_token(elems[j]).col))
                break
            slice_item("fn", name, start, j)
            i = j + 1
            continue
        if kw in ("struct", "enum", "union", "trait"):
            name = expect_name(i + 1)
            if name is None:
                issues.append(SyntaxIssue(f"expected name after `{kw}`", head.line, head.col))
                break
            j = _skip_generics(elems, i + 2)
            end = None
            while j < n:
                e = elems[j]
                if isinstance(e, RGroup) and e.open.text == "{":
                    end = j
                    break
                if isinstance(e, RGroup) and e.open.text == "(" and kw == "struct":
                    if j + 1 < n and _is_tok(elems[j + 1], ";"):
                        end = j + 1
                        break
                if _is_tok(e, ";"):
                    end = j
                    break
                j += 1
            if end is None:
                issues.append(SyntaxIssue(f"unterminated `{kw}`", head.line, head.col))
                break
            slice_item(kw, name, start, end)
            i = end + 1
            continue
        if kw == "impl":
            j = i + 1
            end = None
            while j < n:
                if isinstance(elems[j], RGroup) and elems[j].open.text == "{":
                    end = j
                    break
                j += 1
            if end is None:
                issues.append(SyntaxIssue("unterminated `impl`", head.line, head.col))
                break
            slice_item("impl", None, start, end)
            i = end + 1
            continue
        if kw == "mod":
            name = expect_name(i + 1)
            j = i + 2
            if j < n and isinstance(elems[j], RGroup) and elems[j].open.text == "{":
                slice_item("mod", name, start, j)
                i = j + 1
                continue
            if j < n and _is_tok(elems[j], ";"):
                slice_item("mod", name, start, j)
                i = j + 1
                continue
            issues.append(SyntaxIssue("unterminated `mod`", head.line, head.col))
            break
        if kw == "macro_rules":
            if not (i + 1 < n and _is_tok(elems[i + 1], "!")):
                issues.append(SyntaxIssue("expected `!` after macro_rules", head.line, head.col))
                break
            name = expect_name(i + 2)
            j = i + 3
            if name is None or j >= n or not isinstance(elems[j], RGroup):
                issues.append(SyntaxIssue("malformed macro_rules", head.line, head.col))
                break
            slice_item("macro", name, start, j)
            i = j + 1
            continue
        if kw in ("use", "const", "static", "type"):
            name = None
            if kw in ("const", "static", "type"):
                at = i + 1
                if at < n and _is_tok(elems[at], "mut"):
                    at += 1
                name = expect_name(at)
            j = i + 1
            while j < n and not _is_tok(elems[j], ";"):
                j += 1
            if j >= n:
                issues.append(SyntaxIssue(f"missing `;` after `{kw}`", head.line, head.col))
                break
            slice_item(kw, name, start, j)
            i = j + 1
            continue
        if kw == "extern" and i + 1 < n and _is_tok(elems[i + 1], "crate"):
            j = i
            while j < n and not _is_tok(elems[j], ";"):
                j += 1
            if j >= n:
                issues.append(SyntaxIssue("missing `;` after extern crate", head.line, head.col))
                break
            slice_item("extern-crate", expect_name(i + 2), start, j)
            i = j + 1
            continue
        if isinstance(head, RToken) and head.kind == "ident" and i + 1 < n and _is_tok(
            elems[i + 1], "!"
        ):
            j = i + 2
            if j < n and isinstance(elems[j], RGroup):
                if elems[j].open.text == "{":
                    slice_item("macro-invocation", head.text, start, j)
                    i = j + 1
                    continue
                if j + 1 < n and _is_tok(elems[j + 1], ";"):
                    slice_item("macro-invocation", head.text, start, j + 1)
                    i = j + 2
                    continue
            issues.append(SyntaxIssue("malformed macro invocation", head.line, head.col))
            break
        if _is_tok(head, ";"):
            i += 1
            continue
        issues.append(SyntaxIssue(f"expected item, found `{head.text}`", head.line, head.col))
        break
    return items, issues


def syntax_issues(text: str) -> list[SyntaxIssue]:
    _, issues = parse_items(text)
    return issues


def count_statements(text: str) -> int:
    """Parser-level statement count: `;` inside brace groups plus control heads.

    Whitespace- and formatting-robust; used by the laziness ratio rule.
    """
    try:
        tokens = tokenize(text)
    except RustLexError:
        return 0
    elems, issues = build_tree(tokens)

    def walk(children, in_brace: bool) -> int:
        total = 0
        for e in children:
            if isinstance(e, RGroup):
                total += walk(e.children, e.open.text == "{")
            elif e.kind == "punct" and e.text == ";":
                total += 1 if in_brace else 0
            elif e.kind == "keyword" and e.text in _CONTROL_KEYWORDS:
                total += 1
        return total

    return walk(elems, False)


def unsafe_line_spans(text: str) -> list[tuple[int, int]]:
    """Line ranges covered by unsafe blocks and unsafe-fn bodies (inclusive)."""
    tokens = tokenize(text)
    elems, issues = build_tree(tokens)
    spans: list[tuple[int, int]] = []

    def walk(children):
        seq = list(children)
        for i, e in enumerate(seq):
            if isinstance(e, RGroup):
                walk(e.children)
                continue
            if not (e.kind == "keyword" and e.text == "unsafe"):
                continue
            # find the brace group this `unsafe` governs at the same level
            for j in range(i + 1, len(seq)):
                nxt = seq[j]
                if isinstance(nxt, RGroup) and nxt.open.text == "{":
                    if j == i + 1:
                        spans.append((e.line, nxt.close.line))  # unsafe block
                    else:
                        spans.append((nxt.open.line, nxt.close.line))  # unsafe fn/impl body
                    break
                if _is_tok(nxt, ";"):
                    break
        return

    walk(elems)
    return sorted(spans)


def rename_fn(text: str, new_name: str) -> str:
    """Rewrite the first top-level `fn` item's name; other text untouched."""
    tokens = [t for t in tokenize(text) if t.kind != "comment"]
    depth = 0
    for i, t in enumerate(tokens):
        if t.kind == "punct" and t.text in "([{":
            depth += 1
        elif t.kind == "punct" and t.text in ")]}":
            depth -= 1
        elif depth == 0 and t.kind == "keyword" and t.text == "fn":
            if i + 1 < len(tokens) and tokens[i + 1].kind in ("ident", "keyword"):
                name_tok = tokens[i + 1]
                return text[: name_tok.offset] + new_name + text[name_tok.end_offset :]
    return text


def fn_name(text: str) -> str | None:
    items, issues = parse_items(text)
    for it in items:
        if it.kind == "fn":
            return it.name
    return None
