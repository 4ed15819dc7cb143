#!/usr/bin/env python3
"""Regenerate the committed fixture corpora.

The authored completion tables below are the source of truth; this script
runs the real pipeline/repair loops against them, recording prompt-keyed
replay files, and freezes oracle-computed expected values. Deterministic in
a fixed toolchain environment.

Usage: python tools/build_fixtures.py [mini|hard|repair18|laziness|codebleu|golden|all]
"""

from __future__ import annotations

import json
import re
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(ROOT / "tests" / "oracles"))

from migratekit.config import load_config  # noqa: E402
from migratekit.c_frontend import parse_module  # noqa: E402
from migratekit.context_prober import CodebaseIndex, probe_context  # noqa: E402
from migratekit.orchestrator import Pipeline  # noqa: E402
from migratekit.prompts import render_repair_prompt, render_translation_prompt  # noqa: E402
from migratekit.repairer import repair  # noqa: E402
from migratekit.rust_prober import ProbeItem, ResolvedUnit, compile_check  # noqa: E402
from migratekit.translator import RecordingBackend  # noqa: E402

FIX = ROOT / "fixtures"

_REPAIR_NAME_RE = re.compile(r"repairing the Rust function `(\w+)`")


class AuthoredBackend:
    """Answers prompts from authored per-function completion lists."""

    kind = "authored"

    def __init__(self, table: dict):
        self.table = table
        self.counters: dict[tuple[str, str], int] = {}

    def complete(self, prompt: str, *, unit=None) -> str:
        if prompt.startswith("You are translating"):
            kind, name = "translate", unit.core.name
        else:
            m = _REPAIR_NAME_RE.search(prompt)
            if not m:
                raise RuntimeError("cannot identify repair prompt target")
            kind, name = "repair", m.group(1)
        seq = self.table[kind][name]
        at = self.counters.get((kind, name), 0)
        if at >= len(seq):
            raise RuntimeError(f"authored table exhausted for {kind}/{name}")
        self.counters[(kind, name)] = at + 1
        return seq[at]


def rust(code: str) -> str:
    return f"```rust\n{code.strip()}\n```"


# --------------------------------------------------------------------------
# mini corpus: 11 functions, all compile after probing (no repair needed)
# --------------------------------------------------------------------------

MINI_TRANSLATIONS = {
    "clamp_nonneg": [rust("""
pub fn clamp_nonneg(v: i32) -> i32 {
    if v < 0 {
        return 0;
    }
    v
}
""")],
    "scale_up": [
        # first attempt: unbalanced brace, exercises the syntax-retry loop
        rust("""
pub fn scale_up(v: i32) -> i32 {
    clamp_nonneg(v) << SCALE_SHIFT
"""),
        rust("""
pub fn scale_up(v: i32) -> i32 {
    clamp_nonneg(v) << SCALE_SHIFT
}
"""),
    ],
    "gcd_pair": [
        # two invalid attempts then a valid one: the spec's cap-3 example
        rust("pub fn gcd_pair(mut a: u32, mut b: u32 -> u32 {"),
        rust("""
pub fn gcd_pair(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
"""),
        rust("""
pub fn gcd_pair(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
"""),
    ],
    "is_even": [rust("""
pub fn is_even(n: u32) -> i32 {
    if n == 0 {
        return 1;
    }
    is_odd(n - 1)
}
""")],
    "is_odd": [rust("""
pub fn is_odd(n: u32) -> i32 {
    if n == 0 {
        return 0;
    }
    is_even(n - 1)
}
""")],
    "checked_div": [rust("""
pub fn checked_div(num: i32, den: i32) -> i32 {
    if den == 0 {
        return clamp_nonneg(num);
    }
    num / den
}
""")],
    "weighted_mix": [rust("""
pub fn weighted_mix(a: i32, b: i32) -> i64 {
    let left = scale_up(a) as i64;
    let right = checked_div(b, 3) as i64;
    left + right
}
""")],
    "accum_add": [rust("""
pub fn accum_add(acc: &mut accum, value: i32) {
    acc.total += value as i64;
    acc.count += 1;
}
""")],
    "accum_mean": [rust("""
pub fn accum_mean(acc: &accum) -> i64 {
    if acc.count == 0 {
        return 0;
    }
    acc.total / acc.count as i64
}
""")],
    "ring_next": [rust("""
pub fn ring_next(cur: u32, size: u32) -> u32 {
    let g = gcd_pair(cur + 1, size);
    unsafe {
        ring_steps += 1;
    }
    (cur + g) % size
}
""")],
    "ring_scan": [rust("""
pub fn ring_scan(start: u32, size: u32) -> u32 {
    let mut cur = start;
    let mut i: u32 = 0;
    while i < MAX_ITER {
        if i >= unsafe { step_budget } {
            break;
        }
        cur = ring_next(cur, size);
        if is_even(cur) != 0 {
            cur = cur + 1;
        }
        i += 1;
    }
    cur
}
""")],
}


# --------------------------------------------------------------------------
# hard corpus: exercises repair (round-1 fix) and the unsafe fallback path
# --------------------------------------------------------------------------

HARD_TRANSLATIONS = {
    "base_val": [rust("""
pub fn base_val(v: i32) -> i32 {
    if v > 100 {
        return 100;
    }
    v
}
""")],
    # type errors (E0308): probing cannot help, repair round 1 fixes them
    "mix_pair": [rust("""
pub fn mix_pair(a: i32, b: i32) -> i32 {
    let left: i64 = base_val(a);
    let right: i64 = base_val(b);
    left * 2 + right
}
""")],
    # persistently broken: three repair rounds keep failing, fallback applies
    "spin_sum": [rust("""
pub fn spin_sum(n: u32) -> u32 {
    let mut acc: u32 = 0;
    let mut i: u32 = 0;
    while i < n {
        acc = acc + i * i;
        if acc_total > 10000 {
            acc = acc % 97;
        }
        i += 1;
    }
    acc
}
""")],
}

HARD_REPAIRS = {
    "mix_pair": [rust("""
pub fn mix_pair(a: i32, b: i32) -> i32 {
    let left: i32 = base_val(a);
    let right: i32 = base_val(b);
    left * 2 + right
}
""")],
    "spin_sum": [
        rust("""
pub fn spin_sum(n: u32) -> u32 {
    let mut acc: u32 = 0;
    let mut i: u32 = 0;
    while i < n {
        acc = acc + i * i;
        if running_total > 10000 {
            acc = acc % 97;
        }
        i += 1;
    }
    acc
}
"""),
        rust("""
pub fn spin_sum(n: u32) -> u32 {
    let mut acc: u32 = 0;
    let mut i: u32 = 0;
    while i < n {
        acc = acc + i * i;
        if acc_sum > 10000 {
            acc = acc % 97;
        }
        i += 1;
    }
    acc
}
"""),
        rust("""
pub fn spin_sum(n: u32) -> u32 {
    let mut acc: u32 = 0;
    let mut i: u32 = 0;
    while i < n {
        acc = acc + i * i;
        if grand_total > 10000 {
            acc = acc % 97;
        }
        i += 1;
    }
    acc
}
"""),
    ],
}


def build_corpus(corpus: str, translations: dict, repairs: dict):
    cfg = load_config(FIX / f"{corpus}.toml")
    backend = RecordingBackend(AuthoredBackend({"translate": translations,
                                                "repair": repairs}))
    workdir = Path(tempfile.mkdtemp(prefix=f"fixturegen-{corpus}-"))
    try:
        pipeline = Pipeline(cfg, workdir, backend=backend)
        report = pipeline.run()
        halted = report.get("halted", {})
        if halted:
            raise RuntimeError(f"{corpus} corpus build halted lanes: {halted}")
        status = report["module"]["fusion_status"]
        if status != "compiles":
            raise RuntimeError(f"{corpus} module status {status}, expected compiles")
        backend.dump(FIX / f"{corpus}_replay.json")
        print(f"[{corpus}] module compiles; replay entries: {len(backend.recorded)}")
    finally:
        shutil.rmtree(workdir, ignore_errors=True)


# --------------------------------------------------------------------------
# repair-18 corpus: CSR trajectory 7/18 -> 12/18 -> 14/18 -> 15/18
# --------------------------------------------------------------------------

def _fn(name: str, body: str) -> str:
    return body.strip()


REPAIR18_ROUND0 = {
    # 7 that compile as translated
    "sq_i32": "pub fn sq_i32(x: i32) -> i32 { x * x }",
    "abs_i32": "pub fn abs_i32(x: i32) -> i32 { if x < 0 { -x } else { x } }",
    "add_sat": "pub fn add_sat(a: u32, b: u32) -> u32 { a.saturating_add(b) }",
    "cube": "pub fn cube(x: i64) -> i64 { x * x * x }",
    "min3": "pub fn min3(a: i32, b: i32, c: i32) -> i32 { a.min(b).min(c) }",
    "pow2": "pub fn pow2(n: u32) -> u64 { 1u64 << n }",
    "half_up": "pub fn half_up(x: u32) -> u32 { (x + 1) / 2 }",
    # fixed in round 1
    "isqrt_floor": _fn("isqrt_floor", """
pub fn isqrt_floor(n: u64) -> u64 {
    let mut r: u64 = 0;
    while (r + 1) * (r + 1) <= limitt {
        r += 1;
    }
    r
}
"""),
    "log2_floor": _fn("log2_floor", """
pub fn log2_floor(mut n: u64) -> u32 {
    let mut k: i64 = 0;
    while n > 1 {
        n >>= 1;
        k += 1;
    }
    k
}
"""),
    "hypot_approx": _fn("hypot_approx", """
pub fn hypot_approx(a: f64, b: f64) -> f64 {
    let s = (a * a + b * b);
    let mut guess = 1.0.max(s);
    guess
}
"""),
    "mean_u32": _fn("mean_u32", """
pub fn mean_u32(a: u32, b: u32) -> u32 {
    let sum = a as u64 + b as u64;
    (sum / total_count) as u32
}
"""),
    "gcd_rec": _fn("gcd_rec", """
pub fn gcd_rec(a: u64, b: u64) -> u64 {
    if b == 0 {
        return a as u32;
    }
    gcd_rec(b, a % b)
}
"""),
    # fixed in round 2
    "clamp_range": _fn("clamp_range", """
pub fn clamp_range(v: i32, lo: i32, hi: i32) -> i32 {
    if v < lo_bound {
        return lo;
    }
    if v > hi {
        return hi;
    }
    v
}
"""),
    "wrap_add": _fn("wrap_add", """
pub fn wrap_add(a: u32, b: u32) -> u32 {
    let boxed = u32 { value: a };
    boxed.value.wrapping_add(b)
}
"""),
    # fixed in round 3
    "mul_shift": _fn("mul_shift", """
pub fn mul_shift(a: u64, b: u64) -> u64 {
    let wide = full_mul(a, b);
    (wide >> 32) as u64
}
"""),
    # never fixed within the cap
    "poly_eval": _fn("poly_eval", """
pub fn poly_eval(x: i64) -> i64 {
    coeff3 * x * x * x + coeff2 * x * x + coeff1 * x + coeff0
}
"""),
    "dot3": _fn("dot3", """
pub fn dot3(a: f64, b: f64, c: f64) -> f64 {
    a * basis_x + b * basis_y + c * basis_z
}
"""),
    "norm_angle": _fn("norm_angle", """
pub fn norm_angle(mut d: i32) -> i32 {
    while d < 0 {
        d += full_turn;
    }
    d % full_turn
}
"""),
}

REPAIR18_ROUNDS = {
    "isqrt_floor": ["""
pub fn isqrt_floor(n: u64) -> u64 {
    let mut r: u64 = 0;
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}
"""],
    "log2_floor": ["""
pub fn log2_floor(mut n: u64) -> u32 {
    let mut k: u32 = 0;
    while n > 1 {
        n >>= 1;
        k += 1;
    }
    k
}
"""],
    "hypot_approx": ["""
pub fn hypot_approx(a: f64, b: f64) -> f64 {
    let s = a * a + b * b;
    let guess = 1.0_f64.max(s);
    guess
}
"""],
    "mean_u32": ["""
pub fn mean_u32(a: u32, b: u32) -> u32 {
    let sum = a as u64 + b as u64;
    (sum / 2) as u32
}
"""],
    "gcd_rec": ["""
pub fn gcd_rec(a: u64, b: u64) -> u64 {
    if b == 0 {
        return a;
    }
    gcd_rec(b, a % b)
}
"""],
    "clamp_range": [
        """
pub fn clamp_range(v: i32, lo: i32, hi: i32) -> i32 {
    if v < lo {
        return lo as i64;
    }
    if v > hi {
        return hi;
    }
    v
}
""",
        """
pub fn clamp_range(v: i32, lo: i32, hi: i32) -> i32 {
    if v < lo {
        return lo;
    }
    if v > hi {
        return hi;
    }
    v
}
""",
    ],
    "wrap_add": [
        """
pub fn wrap_add(a: u32, b: u32) -> u32 {
    let boxed = u32 { value: a + unknown_bias };
    boxed.value.wrapping_add(b)
}
""",
        """
pub fn wrap_add(a: u32, b: u32) -> u32 {
    a.wrapping_add(b)
}
""",
    ],
    "mul_shift": [
        """
pub fn mul_shift(a: u64, b: u64) -> u64 {
    let wide = wide_mul(a, b);
    (wide >> 32) as u64
}
""",
        """
pub fn mul_shift(a: u64, b: u64) -> u64 {
    let wide: u128 = (a as u128) * (b as u128);
    (wide >> 32) as u32
}
""",
        """
pub fn mul_shift(a: u64, b: u64) -> u64 {
    let wide: u128 = (a as u128) * (b as u128);
    (wide >> 32) as u64
}
""",
    ],
    "poly_eval": [
        """
pub fn poly_eval(x: i64) -> i64 {
    c3 * x * x * x + c2 * x * x + c1 * x + c0
}
""",
        """
pub fn poly_eval(x: i64) -> i64 {
    k3 * x * x * x + k2 * x * x + k1 * x + k0
}
""",
        """
pub fn poly_eval(x: i64) -> i64 {
    a3 * x * x * x + a2 * x * x + a1 * x + a0
}
""",
    ],
    "dot3": [
        """
pub fn dot3(a: f64, b: f64, c: f64) -> f64 {
    a * bx + b * by + c * bz
}
""",
        """
pub fn dot3(a: f64, b: f64, c: f64) -> f64 {
    a * ex + b * ey + c * ez
}
""",
        """
pub fn dot3(a: f64, b: f64, c: f64) -> f64 {
    a * ux + b * uy + c * uz
}
""",
    ],
    "norm_angle": [
        """
pub fn norm_angle(mut d: i32) -> i32 {
    while d < 0 {
        d += turn_degrees;
    }
    d % turn_degrees
}
""",
        """
pub fn norm_angle(mut d: i32) -> i32 {
    while d < 0 {
        d += whole_turn;
    }
    d % whole_turn
}
""",
        """
pub fn norm_angle(mut d: i32) -> i32 {
    while d < 0 {
        d += circle_deg;
    }
    d % circle_deg
}
""",
    ],
}

EXPECTED_FIX_ROUND = {
    "isqrt_floor": 1, "log2_floor": 1, "hypot_approx": 1, "mean_u32": 1,
    "gcd_rec": 1, "clamp_range": 2, "wrap_add": 2, "mul_shift": 3,
    "poly_eval": None, "dot3": None, "norm_angle": None,
}


def make_unit(name: str, text: str) -> ResolvedUnit:
    diags = compile_check([text])
    status = "compiles" if not diags else (
        "unresolved-remaining" if any(d.is_resolution() for d in diags) else "compile-error"
    )
    return ResolvedUnit(
        core_id=f"math.c::{name}",
        items=(ProbeItem(name, text.strip(), "translated"),),
        diagnostics=tuple(diags),
        iterations_used=1,
        status=status,
    )


def build_repair18():
    units = {name: make_unit(name, text) for name, text in REPAIR18_ROUND0.items()}
    compiling = [n for n, u in units.items() if u.status == "compiles"]
    if len(compiling) != 7:
        raise RuntimeError(f"expected 7 round-0 compilers, got {len(compiling)}: {compiling}")
    table = {"translate": {}, "repair": {n: [rust(t) for t in seq]
                                         for n, seq in REPAIR18_ROUNDS.items()}}
    backend = RecordingBackend(AuthoredBackend(table))
    fixed_round: dict[str, int | None] = {}
    for name, unit in sorted(units.items()):
        if unit.status == "compiles":
            continue
        outcome = repair(unit, backend, cap=3)
        fixed = next((a.round for a in outcome.attempts if a.outcome == "compiles"), None)
        fixed_round[name] = fixed
        if fixed != EXPECTED_FIX_ROUND[name]:
            raise RuntimeError(
                f"{name}: fixed at round {fixed}, designed {EXPECTED_FIX_ROUND[name]}"
            )
    csr = [7]
    for k in (1, 2, 3):
        csr.append(7 + sum(1 for r in fixed_round.values() if r is not None and r <= k))
    if csr != [7, 12, 14, 15]:
        raise RuntimeError(f"CSR trajectory {csr}, expected [7, 12, 14, 15]")
    (FIX / "repair18" / "units.json").write_text(
        json.dumps({n: t.strip() for n, t in sorted(REPAIR18_ROUND0.items())},
                   indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    backend.dump(FIX / "repair18_replay.json")
    print(f"[repair18] CSR trajectory {'/'.join(str(c) for c in csr)} over 18")


# --------------------------------------------------------------------------
# laziness corpora
# --------------------------------------------------------------------------

def c_fn(name: str, stmts: int) -> str:
    body = "\n".join(f"    x = x + {i};" for i in range(stmts - 1))
    return f"int {name}(int x)\n{{\n{body}\n    return x;\n}}\n"


def rust_fn(name: str, stmts: int) -> str:
    body = "\n".join(f"    x = x + {i};" for i in range(stmts - 1))
    return f"pub fn {name}(mut x: i32) -> i32 {{\n{body}\n    return x;\n}}\n"


PLACEHOLDER_COMMENTS = [
    "// ... rest of the implementation omitted",
    "// remaining cases handled as above",
    "/* similar to above for the other branches */",
    "// omitted for brevity",
    "// rest of the loop body",
    "// ...",
]


def build_laziness():
    pairs: list[dict] = []
    # 20 faithful pairs, clearly non-lazy
    for i, stmts in enumerate(range(5, 25)):
        name = f"faithful_{i}"
        pairs.append({
            "name": name,
            "c": c_fn(name, stmts),
            "rust": rust_fn(name, stmts),
            "lazy": False,
        })
    # 13 placeholder-comment pairs (one per pattern style, cycled)
    for i in range(13):
        name = f"placeholder_{i}"
        comment = PLACEHOLDER_COMMENTS[i % len(PLACEHOLDER_COMMENTS)]
        body = f"    x = x + 1;\n    {comment}\n    return x;\n"
        pairs.append({
            "name": name,
            "c": c_fn(name, 14),
            "rust": f"pub fn {name}(mut x: i32) -> i32 {{\n{body}}}\n",
            "lazy": True,
        })
    # 8 statement-ratio pairs: big C bodies shrunk to stubs, no placeholder text
    for i, stmts in enumerate(range(12, 44, 4)):
        name = f"shrunk_{i}"
        pairs.append({
            "name": name,
            "c": c_fn(name, stmts),
            "rust": f"pub fn {name}(mut x: i32) -> i32 {{\n    x = x * 2;\n    return x;\n}}\n",
            "lazy": True,
        })
    (FIX / "laziness_labeled.json").write_text(
        json.dumps(pairs, indent=2) + "\n", encoding="utf-8"
    )
    print(f"[laziness] {len(pairs)} labeled pairs")


# --------------------------------------------------------------------------
# codebleu pairs frozen against the oracle
# --------------------------------------------------------------------------

def build_codebleu():
    from codebleu_oracle import codebleu_oracle

    base = """
pub fn running_sum(values: &[i32]) -> i32 {
    let mut total = 0;
    for v in values {
        total = total + v;
    }
    total
}
"""
    variants = [
        base,
        base.replace("total", "acc"),
        base.replace("i32", "i64"),
        base.replace("total + v", "total + v * 2"),
        """
pub fn running_sum(values: &[i32]) -> i32 {
    let mut total = 0;
    let mut i = 0;
    while i < values.len() {
        total = total + values[i];
        i = i + 1;
    }
    total
}
""",
        "pub fn running_sum(values: &[i32]) -> i32 { values.iter().sum() }",
        """
pub fn scale(v: u64, k: u64) -> u64 {
    let scaled = v * k;
    scaled >> 2
}
""",
        """
pub fn unrelated(flag: bool) -> &'static str {
    if flag {
        "yes"
    } else {
        "no"
    }
}
""",
    ]
    extra_refs = [
        ("pub fn min2(a: i32, b: i32) -> i32 { if a < b { a } else { b } }",
         "pub fn min2(a: i32, b: i32) -> i32 { if a <= b { a } else { b } }"),
        ("pub fn zero() -> i32 { 0 }", "pub fn zero() -> i32 { 0 }"),
        ("pub fn id(x: u8) -> u8 { x }", "pub fn id(y: u8) -> u8 { y }"),
        ("fn f() { let a = g(); let b = a + 1; use_it(b); }",
         "fn f() { let a = g(); let c = a + 1; use_it(c); }"),
    ]
    pairs = []
    for cand in variants:
        pairs.append({"candidate": cand.strip(), "reference": base.strip()})
    for ref in variants[1:5]:
        pairs.append({"candidate": base.strip(), "reference": ref.strip()})
    for cand, ref in extra_refs:
        pairs.append({"candidate": cand, "reference": ref})
        pairs.append({"candidate": ref, "reference": cand})
    pairs = pairs[:20]
    for p in pairs:
        p["expected"] = codebleu_oracle(p["candidate"], p["reference"])
    (FIX / "codebleu_pairs.json").write_text(
        json.dumps(pairs, indent=2) + "\n", encoding="utf-8"
    )
    print(f"[codebleu] {len(pairs)} pairs frozen")


# --------------------------------------------------------------------------
# golden prompt files
# --------------------------------------------------------------------------

def build_golden():
    module = parse_module([FIX / "mini_c"])
    index = CodebaseIndex.build(module)
    core = module.unit(str(FIX / "mini_c" / "ringstat.c") + "::ring_next")
    unit, _, _, _ = probe_context(core, module, index)
    prompt = render_translation_prompt(unit, ("Do not use the `std` crate.",))
    (FIX / "golden" / "translation_prompt.txt").write_text(prompt, encoding="utf-8")
    broken = "pub fn ring_next(cur: u32, size: u32) -> u32 {\n    gcd_pair(cur + 1, size)\n}"
    diags = compile_check([broken])
    rprompt = render_repair_prompt(
        "ring_next",
        broken,
        [d.rendered for d in diags],
        ("Do not use the `std` crate.",),
    )
    (FIX / "golden" / "repair_prompt.txt").write_text(rprompt, encoding="utf-8")
    print("[golden] prompt files written")


def main():
    targets = sys.argv[1:] or ["all"]
    if "all" in targets:
        targets = ["mini", "hard", "repair18", "laziness", "codebleu", "golden"]
    for t in targets:
        if t == "mini":
            build_corpus("mini_c", MINI_TRANSLATIONS, {})
        elif t == "hard":
            build_corpus("hard_c", HARD_TRANSLATIONS, HARD_REPAIRS)
        elif t == "repair18":
            build_repair18()
        elif t == "laziness":
            build_laziness()
        elif t == "codebleu":
            build_codebleu()
        elif t == "golden":
            build_golden()
        else:
            raise SystemExit(f"unknown target {t}")


if __name__ == "__main__":
    main()
