"""Tokenizer for Rust source text.

Covers the full lexical surface needed to split completions into items and to
measure them: nested block comments, raw/byte strings, lifetimes vs char
literals, raw identifiers, and multi-character operators.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

RUST_KEYWORDS = frozenset(
    """
    as async await break const continue crate dyn else enum extern false fn
    for if impl in let loop match mod move mut pub ref return self Self static
    struct super trait true type unsafe use where while union macro_rules
    """.split()
)

_PUNCTS = [
    "<<=", ">>=", "..=", "...",
    "->", "=>", "::", "==", "!=", "<=", ">=", "&&", "||", "<<", ">>",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "..",
    "+", "-", "*", "/", "%", "=", "<", ">", "!", "&", "|", "^", "~",
    "?", "@", "#", "$", ":", ";", ",", ".", "(", ")", "[", "]", "{", "}",
]

_IDENT_RE = re.compile(r"[A-Za-z_]\w*")
_NUMBER_RE = re.compile(
    r"(?:0[xXoObB][0-9a-fA-F_]+|\d[\d_]*\.\d[\d_]*(?:[eE][+-]?\d+)?|\d[\d_]*(?:\.(?!\.))?"
    r"(?:[eE][+-]?\d+)?)(?:[iuf](?:8|16|32|64|128|size)?)?"
)


class RustLexError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class RToken:
    kind: str  # ident | keyword | lifetime | number | string | char | punct | comment
    text: str
    line: int
    col: int
    offset: int

    @property
    def end_offset(self) -> int:
        return self.offset + len(self.text)


def tokenize(text: str) -> list[RToken]:
    toks: list[RToken] = []
    i = 0
    line = 1
    col = 1
    n = len(text)

    def advance(span: str):
        nonlocal line, col
        nl = span.count("\n")
        if nl:
            line += nl
            col = len(span) - span.rfind("\n")
        else:
            col += len(span)

    def emit(kind: str, span: str):
        nonlocal i
        toks.append(RToken(kind, span, line, col, i))
        advance(span)
        i += len(span)

    def scan_string(start: int) -> int:
        j = start + 1
        while j < n and text[j] != '"':
            j += 2 if text[j] == "\\" else 1
        if j >= n:
            raise RustLexError("unterminated string literal", line, col)
        return j + 1

    while i < n:
        c = text[i]
        if c in " \t\r\n":
            advance(c)
            i += 1
            continue
        if text.startswith("//", i):
            j = text.find("\n", i)
            emit("comment", text[i:] if j == -1 else text[i:j])
            continue
        if text.startswith("/*", i):
            depth = 1
            j = i + 2
            while j < n and depth:
                if text.startswith("/*", j):
                    depth += 1
                    j += 2
                elif text.startswith("*/", j):
                    depth -= 1
                    j += 2
                else:
                    j += 1
            if depth:
                raise RustLexError("unterminated block comment", line, col)
            emit("comment", text[i:j])
            continue
        if c == "r" and i + 1 < n and text[i + 1] in "#\"":
            # raw string r"..." / r#"..."# ; raw identifier r#name
            j = i + 1
            hashes = 0
            while j < n and text[j] == "#":
                hashes += 1
                j += 1
            if j < n and text[j] == '"':
                close = '"' + "#" * hashes
                k = text.find(close, j + 1)
                if k == -1:
                    raise RustLexError("unterminated raw string", line, col)
                emit("string", text[i : k + len(close)])
                continue
            if hashes == 1:
                m = _IDENT_RE.match(text, j)
                if m:
                    emit("ident", text[i : m.end()])
                    continue
        if c == "b" and i + 1 < n and text[i + 1] in "\"'":
            if text[i + 1] == '"':
                end = scan_string(i + 1)
                emit("string", text[i:end])
            else:
                j = i + 2
                while j < n and text[j] != "'":
                    j += 2 if text[j] == "\\" else 1
                if j >= n:
                    raise RustLexError("unterminated byte literal", line, col)
                emit("char", text[i : j + 1])
            continue
        if c == '"':
            end = scan_string(i)
            emit("string", text[i:end])
            continue
        if c == "'":
            m = _IDENT_RE.match(text, i + 1)
            if m and not text.startswith("'", m.end()):
                emit("lifetime", text[i : m.end()])
                continue
            j = i + 1
            while j < n and text[j] != "'":
                j += 2 if text[j] == "\\" else 1
            if j >= n:
                raise RustLexError("unterminated character literal", line, col)
            emit("char", text[i : j + 1])
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            span = m.group(0)
            emit("keyword" if span in RUST_KEYWORDS else "ident", span)
            continue
        if c.isdigit():
            m = _NUMBER_RE.match(text, i)
            if m:
                emit("number", m.group(0))
                continue
        for p in _PUNCTS:
            if text.startswith(p, i):
                emit("punct", p)
                break
        else:
            raise RustLexError(f"unexpected character {c!r}", line, col)
    return toks
