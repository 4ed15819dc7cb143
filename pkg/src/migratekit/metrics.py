"""Measurement battery: MML, Safe Code, CSR, laziness rates, report files."""

from __future__ import annotations

import difflib
import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction

from .errors import EmptyInput, LengthMismatch, ParseFailed
from .rust_syntax import syntax_issues, unsafe_line_spans
from .translator import LazinessVerdict


def significant_lines(text: str) -> list[str]:
    """Non-blank lines after trailing-whitespace stripping (the line unit all
    counts and diffs share)."""
    return [ln.rstrip() for ln in text.splitlines() if ln.strip()]


def compute_mml(before: str, after: str) -> int:
    """Manually modified lines: added + changed under an LCS line diff.

    A changed line counts once (not delete+add); a contiguous deleted block
    counts once at the deletion site.
    """
    a = significant_lines(before)
    b = significant_lines(after)
    sm = difflib.SequenceMatcher(a=a, b=b, autojunk=False)
    total = 0
    for op, i1, i2, j1, j2 in sm.get_opcodes():
        if op == "insert":
            total += j2 - j1
        elif op == "replace":
            total += j2 - j1
        elif op == "delete":
            total += 1
    return total


def count_safe_lines(rust_text: str) -> tuple[int, int]:
    """(safe, total) non-blank lines; lines inside unsafe blocks or unsafe-fn
    bodies, including both delimiter lines, count as unsafe."""
    if syntax_issues(rust_text):
        raise ParseFailed("text does not parse; safe-line counts unavailable")
    raw_lines = rust_text.splitlines()
    nonblank = {i + 1 for i, ln in enumerate(raw_lines) if ln.strip()}
    unsafe_lines: set[int] = set()
    for lo, hi in unsafe_line_spans(rust_text):
        unsafe_lines.update(range(lo, hi + 1))
    unsafe_count = len(nonblank & unsafe_lines)
    total = len(nonblank)
    return total - unsafe_count, total


@dataclass(frozen=True)
class Csr:
    compiled: int
    total: int

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.compiled, self.total)

    @property
    def value(self) -> float:
        return self.compiled / self.total

    def __str__(self) -> str:
        return f"{self.compiled}/{self.total}"


def compute_csr(results: list[dict]) -> Csr:
    """Proportion of functions that pass compilation, exact rational kept."""
    if not results:
        raise EmptyInput("CSR needs at least one result")
    compiled = sum(1 for r in results if r["compiled"])
    return Csr(compiled, len(results))


def laziness_rate(
    verdicts: list[LazinessVerdict],
    line_counts: list[int],
    bins: list[tuple[int, int]] | None = None,
) -> dict:
    """Overall lazy rate plus per-bin rates over [lo, hi) line-count ranges.

    Bins with no members are absent from the result, not reported as zero.
    """
    if len(verdicts) != len(line_counts):
        raise LengthMismatch(
            f"{len(verdicts)} verdicts vs {len(line_counts)} line counts"
        )
    total = len(verdicts)
    lazy_total = sum(1 for v in verdicts if v.lazy)
    out: dict = {
        "overall": (lazy_total / total) if total else 0.0,
        "lazy": lazy_total,
        "total": total,
        "bins": {},
    }
    for lo, hi in bins or []:
        members = [v for v, lc in zip(verdicts, line_counts) if lo <= lc < hi]
        if not members:
            continue
        lazy = sum(1 for v in members if v.lazy)
        out["bins"][f"[{lo},{hi})"] = {
            "lazy": lazy,
            "total": len(members),
            "rate": lazy / len(members),
        }
    return out


def format_pct(count: int, total: int) -> str:
    """round(100*count/total, 2) rendered with two decimals, half-up."""
    if total == 0:
        return "0.00"
    pct = Decimal(count) * 100 / Decimal(total)
    return str(pct.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


@dataclass
class FunctionMetrics:
    id: str
    line_count: int
    safe_lines: int
    total_lines: int
    lazy: bool
    compiled: bool
    mml: int
    provenance: str = "translated"


def module_report(
    per_function: list[FunctionMetrics],
    module_text: str,
    llm_item_texts: list[str],
    manual_mml: int,
    codebleu_score: float | None = None,
) -> dict:
    """Assemble the MetricsReport payload (report.json content)."""
    total_raw = len(module_text.splitlines())
    total_lines = len(significant_lines(module_text))
    llm_text = "\n".join(llm_item_texts)
    llm_lines = len(significant_lines(llm_text))
    try:
        sc_count, _ = count_safe_lines(module_text)
    except ParseFailed:
        sc_count = 0
    try:
        sc_llm, llm_total = count_safe_lines(llm_text) if llm_item_texts else (0, 0)
    except ParseFailed:
        sc_llm, llm_total = 0, 0
    csr = compute_csr([{"compiled": f.compiled} for f in per_function]) if per_function else None
    lazy_count = sum(1 for f in per_function if f.lazy)
    report = {
        "per_function": {
            f.id: {
                "line_count": f.line_count,
                "safe_lines": f.safe_lines,
                "total_lines": f.total_lines,
                "lazy": f.lazy,
                "compiled": f.compiled,
                "mml": f.mml,
                "provenance": f.provenance,
            }
            for f in per_function
        },
        "module": {
            "total_lines": total_lines,
            "total_lines_raw": total_raw,
            "llm_lines": llm_lines,
            "mml_count": manual_mml,
            "mml_pct": format_pct(manual_mml, total_lines),
            "sc_count": sc_count,
            "sc_pct": format_pct(sc_count, total_lines),
            "sc_llm_count": sc_llm,
            "sc_llm_pct": format_pct(sc_llm, llm_lines),
            "csr": str(csr) if csr else None,
            "csr_value": csr.value if csr else None,
            "laziness_rate": (lazy_count / len(per_function)) if per_function else 0.0,
            "laziness_pct": format_pct(lazy_count, len(per_function)) if per_function else "0.00",
        },
    }
    if codebleu_score is not None:
        report["module"]["codebleu"] = round(codebleu_score, 4)
    return report


def report_markdown(report: dict, title: str = "module") -> str:
    m = report["module"]
    header = (
        "| Dataset | # Line | # Line-LLM | # MML | # SC | # SC-LLM | % MML | % SC | % SC-LLM |\n"
        "|---------|--------|------------|-------|------|----------|-------|------|----------|\n"
    )
    row = (
        f"| {title} | {m['total_lines']} | {m['llm_lines']} | {m['mml_count']} | "
        f"{m['sc_count']} | {m['sc_llm_count']} | {m['mml_pct']}% | {m['sc_pct']}% | "
        f"{m['sc_llm_pct']}% |\n"
    )
    lines = [
        f"# Migration report: {title}",
        "",
        header + row,
        f"- Raw line count (with blanks): {m['total_lines_raw']}; "
        f"non-blank: {m['total_lines']}",
        f"- CSR: {m['csr']}" + (f" ({m['csr_value']:.4f})" if m["csr_value"] is not None else ""),
        f"- Laziness rate: {m['laziness_pct']}%",
    ]
    if "codebleu" in m:
        lines.append(f"- CodeBLEU: {m['codebleu']}")
    lines.append("")
    lines.append("| Function | lines | safe | compiled | lazy | MML |")
    lines.append("|----------|-------|------|----------|------|-----|")
    for fid, f in sorted(report["per_function"].items()):
        lines.append(
            f"| {fid} | {f['line_count']} | {f['safe_lines']}/{f['total_lines']} | "
            f"{'yes' if f['compiled'] else 'no'} | {'yes' if f['lazy'] else 'no'} | {f['mml']} |"
        )
    return "\n".join(lines) + "\n"


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"
