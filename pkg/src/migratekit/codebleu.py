"""CodeBLEU: n-gram, keyword-weighted n-gram, syntax-subtree and data-flow
match, combined by a weight 4-tuple.

Exact component definitions (the independent test oracle implements the same
math from scratch):

- Tokens: structural tokens (comments dropped), compared by text.
- n-gram match: for n = 1..4 with at least one candidate n-gram, the clipped
  precision p_n = (matches + 1) / (candidate n-grams + 1) (add-one smoothing,
  so a nonempty candidate never scores 0 from n-gram zeros alone); combined
  as BP * exp(mean log p_n) with brevity penalty BP = min(1, e^(1 - r/c)).
- weighted n-gram match: identical except unigrams weigh 5 when the token is
  a reserved word of the grammar, 1 otherwise.
- syntax match: multiset recall of subtree signatures (delimiter, child
  labels) over the token-tree, leaves labeled by kind except punctuation and
  keywords which keep their text; a virtual root spans the whole text.
- dataflow match: recall of (source, target) def-use edges, where targets are
  `let`-bound or assigned names and sources are identifiers in the defining
  expression; both-empty scores 1.
"""

from __future__ import annotations

import math
from collections import Counter

from .c_frontend import CGroup, build_groups
from .c_lexer import tokenize as c_tokenize, C_KEYWORDS
from .errors import ParseFailed, ParseError
from .rust_lexer import RustLexError, tokenize as rust_tokenize, RUST_KEYWORDS
from .rust_syntax import RGroup, build_tree

DEFAULT_WEIGHTS = (0.25, 0.25, 0.25, 0.25)
KEYWORD_WEIGHT = 5
NGRAM_ORDER = 4


def _tokens_and_tree(text: str, grammar: str):
    if grammar == "rust":
        try:
            toks = [t for t in rust_tokenize(text) if t.kind != "comment"]
        except RustLexError as e:
            raise ParseFailed(str(e)) from e
        tree, issues = build_tree(toks)
        if issues:
            raise ParseFailed(str(issues[0]))
        return toks, tree, RUST_KEYWORDS
    if grammar == "c":
        try:
            toks = [t for t in c_tokenize(text, "<codebleu>") if t.kind != "comment"]
            tree = build_groups(toks, "<codebleu>")
        except ParseError as e:
            raise ParseFailed(str(e)) from e
        return toks, tree, C_KEYWORDS
    raise ValueError(f"unknown grammar {grammar!r}")


def _ngrams(texts: list[str], n: int) -> Counter:
    return Counter(tuple(texts[i : i + n]) for i in range(len(texts) - n + 1))


def _ngram_component(cand: list[str], ref: list[str], keywords=None) -> float:
    if not cand:
        return 0.0
    log_sum = 0.0
    used = 0
    for n in range(1, NGRAM_ORDER + 1):
        cand_grams = _ngrams(cand, n)
        if not cand_grams:
            continue
        ref_grams = _ngrams(ref, n)
        if n == 1 and keywords is not None:
            weight = lambda g: KEYWORD_WEIGHT if g[0] in keywords else 1  # noqa: E731
        else:
            weight = lambda g: 1  # noqa: E731
        matches = sum(weight(g) * min(c, ref_grams.get(g, 0)) for g, c in cand_grams.items())
        total = sum(weight(g) * c for g, c in cand_grams.items())
        p = (matches + 1) / (total + 1)
        log_sum += math.log(p)
        used += 1
    if used == 0:
        return 0.0
    bp = 1.0 if len(cand) >= len(ref) else math.exp(1 - len(ref) / len(cand))
    return bp * math.exp(log_sum / used)


def _leaf_label(tok) -> str:
    if tok.kind in ("punct", "keyword"):
        return tok.text
    return tok.kind


def _signatures(tree, grammar: str) -> Counter:
    group_type = RGroup if grammar == "rust" else CGroup
    sigs: Counter = Counter()

    def label(e) -> str:
        if isinstance(e, group_type):
            return f"G{e.open.text}"
        return _leaf_label(e)

    def walk(children, delim: str):
        sigs[(delim, tuple(label(c) for c in children))] += 1
        for c in children:
            if isinstance(c, group_type):
                walk(list(c.children), c.open.text)

    walk(list(tree), "root")
    return sigs


def _subtree_match(cand_tree, ref_tree, grammar: str) -> float:
    cand = _signatures(cand_tree, grammar)
    ref = _signatures(ref_tree, grammar)
    total_ref = sum(ref.values())
    if total_ref == 0:
        return 1.0
    matched = sum(min(c, ref.get(s, 0)) for s, c in cand.items())
    return matched / total_ref


def _dataflow_edges(tree, grammar: str) -> set[tuple[str, str]]:
    group_type = RGroup if grammar == "rust" else CGroup
    edges: set[tuple[str, str]] = set()

    def idents_in(elems) -> list[str]:
        out = []
        for e in elems:
            if isinstance(e, group_type):
                out.extend(idents_in(e.children))
            elif e.kind == "ident":
                out.append(e.text)
        return out

    def walk(children):
        seg: list = []
        for e in list(children) + [None]:
            boundary = e is None or (
                not isinstance(e, group_type) and e.kind == "punct" and e.text == ";"
            )
            if not boundary:
                seg.append(e)
                if isinstance(e, group_type):
                    walk(e.children)
                continue
            toks = [t for t in seg if not isinstance(t, group_type)]
            flat = seg
            target = None
            rhs: list = []
            for i, t in enumerate(flat):
                if (
                    not isinstance(t, group_type)
                    and t.kind == "punct"
                    and (t.text == "=" or (t.text.endswith("=") and t.text not in ("==", "!=", "<=", ">=")))
                ):
                    lhs = [
                        x for x in flat[:i]
                        if not isinstance(x, group_type) and x.kind == "ident"
                    ]
                    if lhs:
                        target = lhs[-1].text
                        rhs = flat[i + 1 :]
                    break
            if target is not None:
                for src in idents_in(rhs):
                    if src != target:
                        edges.add((src, target))
            seg = []

    walk(tree)
    return edges


def _dataflow_match(cand_tree, ref_tree, grammar: str) -> float:
    cand = _dataflow_edges(cand_tree, grammar)
    ref = _dataflow_edges(ref_tree, grammar)
    if not ref:
        return 1.0
    return len(cand & ref) / len(ref)


def codebleu(
    candidate: str,
    reference: str,
    weights: tuple[float, float, float, float] = DEFAULT_WEIGHTS,
    grammar: str = "rust",
) -> float:
    """Weighted combination of the four match components, in [0, 1]."""
    if abs(sum(weights) - 1.0) > 1e-9:
        raise ValueError(f"weights must sum to 1, got {sum(weights)}")
    cand_toks, cand_tree, keywords = _tokens_and_tree(candidate, grammar)
    ref_toks, ref_tree, _ = _tokens_and_tree(reference, grammar)
    cand_texts = [t.text for t in cand_toks]
    ref_texts = [t.text for t in ref_toks]
    ngram = _ngram_component(cand_texts, ref_texts)
    weighted = _ngram_component(cand_texts, ref_texts, keywords)
    syntax = _subtree_match(cand_tree, ref_tree, grammar)
    dataflow = _dataflow_match(cand_tree, ref_tree, grammar)
    score = (
        weights[0] * ngram
        + weights[1] * weighted
        + weights[2] * syntax
        + weights[3] * dataflow
    )
    return min(1.0, max(0.0, score))
