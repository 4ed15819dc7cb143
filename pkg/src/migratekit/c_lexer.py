"""Tokenizer for the supported C subset.

Produces a flat token stream with exact source positions so that spans can be
sliced back out of the original text byte-identically. Comments and
preprocessor directives are kept as tokens; whitespace is dropped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError

C_KEYWORDS = frozenset(
    """
    auto break case char const continue default do double else enum extern
    float for goto if inline int long register restrict return short signed
    sizeof static struct switch typedef union unsigned void volatile while
    _Bool _Complex _Imaginary
    """.split()
)

# Identifiers never treated as unresolved symbols. Extended via config.
C_BUILTINS = frozenset(
    """
    NULL true false bool size_t ssize_t ptrdiff_t intptr_t uintptr_t wchar_t
    int8_t int16_t int32_t int64_t uint8_t uint16_t uint32_t uint64_t va_list
    """.split()
)

# Multi-char operators first so maximal munch wins.
_PUNCTS = [
    "<<=", ">>=", "...",
    "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
    "+", "-", "*", "/", "%", "=", "<", ">", "!", "&", "|", "^", "~",
    "?", ":", ";", ",", ".", "(", ")", "[", "]", "{", "}",
]

_NUMBER_RE = re.compile(
    r"(?:0[xX][0-9a-fA-F]+|\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?"
    r"|\d+(?:[eE][+-]?\d+)?)[uUlLfF]*"
)
_IDENT_RE = re.compile(r"[A-Za-z_]\w*")


@dataclass(frozen=True)
class CToken:
    kind: str  # ident | keyword | number | string | char | punct | comment | pp
    text: str
    line: int  # 1-based
    col: int  # 1-based
    offset: int  # char offset into the file text


def tokenize(text: str, file: str = "<input>") -> list[CToken]:
    toks: list[CToken] = []
    i = 0
    line = 1
    col = 1
    n = len(text)
    at_line_start = True

    def advance(span: str):
        nonlocal line, col
        nl = span.count("\n")
        if nl:
            line += nl
            col = len(span) - span.rfind("\n")
        else:
            col += len(span)

    while i < n:
        c = text[i]
        if c in " \t\r":
            advance(c)
            i += 1
            continue
        if c == "\n":
            advance(c)
            i += 1
            at_line_start = True
            continue
        start_line, start_col, start_off = line, col, i

        if c == "#" and at_line_start:
            # Whole logical line, honoring backslash continuations.
            j = i
            while j < n:
                k = text.find("\n", j)
                if k == -1:
                    j = n
                    break
                if text[k - 1] == "\\" or (k >= 2 and text[k - 2 : k] == "\\\r"):
                    j = k + 1
                    continue
                j = k
                break
            span = text[i:j]
            toks.append(CToken("pp", span, start_line, start_col, start_off))
            advance(span)
            i = j
            continue

        at_line_start = False

        if text.startswith("//", i):
            j = text.find("\n", i)
            j = n if j == -1 else j
            span = text[i:j]
            toks.append(CToken("comment", span, start_line, start_col, start_off))
            advance(span)
            i = j
            continue
        if text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j == -1:
                raise ParseError("unterminated block comment", file, start_line)
            span = text[i : j + 2]
            toks.append(CToken("comment", span, start_line, start_col, start_off))
            advance(span)
            i = j + 2
            continue
        if c == '"' or (c == "L" and i + 1 < n and text[i + 1] == '"'):
            j = i + (2 if c == "L" else 1)
            while j < n and text[j] != '"':
                j += 2 if text[j] == "\\" else 1
            if j >= n:
                raise ParseError("unterminated string literal", file, start_line)
            span = text[i : j + 1]
            toks.append(CToken("string", span, start_line, start_col, start_off))
            advance(span)
            i = j + 1
            continue
        if c == "'":
            j = i + 1
            while j < n and text[j] != "'":
                j += 2 if text[j] == "\\" else 1
            if j >= n:
                raise ParseError("unterminated character literal", file, start_line)
            span = text[i : j + 1]
            toks.append(CToken("char", span, start_line, start_col, start_off))
            advance(span)
            i = j + 1
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            span = m.group(0)
            kind = "keyword" if span in C_KEYWORDS else "ident"
            toks.append(CToken(kind, span, start_line, start_col, start_off))
            advance(span)
            i = m.end()
            continue
        m = _NUMBER_RE.match(text, i)
        if m and (c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit())):
            span = m.group(0)
            toks.append(CToken("number", span, start_line, start_col, start_off))
            advance(span)
            i = m.end()
            continue
        for p in _PUNCTS:
            if text.startswith(p, i):
                toks.append(CToken("punct", p, start_line, start_col, start_off))
                advance(p)
                i += len(p)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", file, start_line)
    return toks


def structural(tokens: list[CToken]) -> list[CToken]:
    """Tokens that shape the parse: drops comments, keeps pp directives."""
    return [t for t in tokens if t.kind != "comment"]
