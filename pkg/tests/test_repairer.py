import pytest

from migratekit.c_frontend import parse_module
from migratekit.errors import FallbackMissing, FixtureMiss
from migratekit.repairer import (
    apply_fallback,
    ensure_unsafe_marked,
    make_fallback_store,
    repair,
)
from migratekit.naive_transpiler import naive_transpile
from migratekit.prompts import render_repair_prompt
from migratekit.rust_prober import ProbeItem, ResolvedUnit, compile_check
from migratekit.rust_syntax import unsafe_line_spans

from conftest import write_module


class ListBackend:
    kind = "replay"

    def __init__(self, completions):
        self.completions = list(completions)
        self.calls = 0

    def complete(self, prompt, *, unit=None):
        if self.calls >= len(self.completions):
            raise FixtureMiss("exhausted")
        c = self.completions[self.calls]
        self.calls += 1
        return c


def failing_unit(name: str, text: str, context=()) -> ResolvedUnit:
    items = tuple(context) + (ProbeItem(name, text, "translated"),)
    diags = compile_check([it.text for it in items])
    assert diags, "unit must fail to compile for repair tests"
    status = "unresolved-remaining" if any(d.is_resolution() for d in diags) else "compile-error"
    return ResolvedUnit(f"m.c::{name}", items, tuple(diags), 1, status)


BROKEN = "pub fn adder(a: i32, b: i32) -> i32 { a + missing_b }"
FIXED = "pub fn adder(a: i32, b: i32) -> i32 { a + b }"


def rust(code: str) -> str:
    return f"```rust\n{code}\n```"


def test_repair_prompt_embeds_diagnostics_and_is_deterministic():
    unit = failing_unit("adder", BROKEN)
    rendered = [d.rendered for d in unit.diagnostics]
    p1 = render_repair_prompt("adder", unit.rendered(), rendered, ("rule",))
    p2 = render_repair_prompt("adder", unit.rendered(), rendered, ("rule",))
    assert p1 == p2
    assert "cannot find value `missing_b`" in p1
    assert p1.index("## Problematic code") < p1.index("## Compiler errors")
    assert p1.index("## Compiler errors") < p1.index("## Repair guidelines")


def test_repair_prompt_truncates_to_twenty_diagnostics():
    body = "\n".join(f"    let x{i}: u32 = bad_{i};" for i in range(25))
    unit = failing_unit("many", f"pub fn many() {{\n{body}\n}}")
    assert len(unit.diagnostics) >= 21
    p = render_repair_prompt("many", unit.rendered(), [d.rendered for d in unit.diagnostics])
    assert p.count("cannot find value") == 20


def test_repair_fixed_first_round():
    unit = failing_unit("adder", BROKEN)
    outcome = repair(unit, ListBackend([rust(FIXED)]), cap=3)
    assert outcome.final_status == "repaired"
    assert len(outcome.attempts) == 1
    assert outcome.attempts[0].outcome == "compiles"
    assert outcome.final_unit.status == "compiles"
    assert outcome.final_unit.core_item.text == FIXED


def test_repair_cap_then_fallback():
    unit = failing_unit("adder", BROKEN)
    core_fn = _core_fn_stub("adder")
    store = {core_fn.id: "pub unsafe fn adder(a: i32, b: i32) -> i32 { a + b }"}
    still_bad = [rust(BROKEN.replace("missing_b", f"missing_{i}")) for i in range(3)]
    outcome = repair(unit, ListBackend(still_bad), cap=3, fallback_store=store,
                     core_fn=core_fn)
    assert outcome.final_status == "fallback-applied"
    assert len(outcome.attempts) == 3
    assert all(a.outcome == "still-failing" for a in outcome.attempts)
    assert outcome.final_unit.core_item.provenance == "fallback"
    assert "unsafe" in outcome.final_unit.core_item.text
    assert outcome.final_unit.status == "compiles"


def test_repair_manual_required_without_fallback():
    unit = failing_unit("adder", BROKEN)
    still_bad = [rust(BROKEN.replace("missing_b", f"missing_{i}")) for i in range(3)]
    outcome = repair(unit, ListBackend(still_bad), cap=3)
    assert outcome.final_status == "manual-required"
    assert len(outcome.attempts) == 3


def test_noncore_edit_rejected_and_counts_a_round():
    ctx = (ProbeItem("LIM", "pub const LIM: u32 = 3;", "catalog", "macro-const"),)
    unit = failing_unit("use_lim", "pub fn use_lim() -> u32 { LIM + missing }", ctx)
    tampering = rust(
        "pub const LIM: u32 = 99;\n\npub fn use_lim() -> u32 { LIM + 1 }"
    )
    good = rust("pub fn use_lim() -> u32 { LIM + 1 }")
    outcome = repair(unit, ListBackend([tampering, good]), cap=3)
    assert outcome.attempts[0].outcome == "rejected-noncore-edit"
    assert outcome.attempts[1].outcome == "compiles"
    assert outcome.final_status == "repaired"
    # non-core immutability: context items unchanged
    assert outcome.final_unit.context_items == ctx


def test_cap_adherence_and_terminal_totality():
    unit = failing_unit("adder", BROKEN)
    for cap in (1, 2, 3):
        bad = [rust(BROKEN.replace("missing_b", f"nope_{i}")) for i in range(cap)]
        outcome = repair(unit, ListBackend(bad), cap=cap)
        assert len(outcome.attempts) <= cap
        assert outcome.final_status in ("repaired", "fallback-applied", "manual-required")


def _core_fn_stub(name: str):
    import tempfile
    from pathlib import Path

    d = Path(tempfile.mkdtemp())
    (d / "s.c").write_text(
        f"int {name}(int a, int b)\n{{\n    return a + b;\n}}\n", encoding="utf-8"
    )
    ir = parse_module([d / "s.c"])
    return ir.functions[0]


def test_apply_fallback_store_hit_and_miss():
    core = _core_fn_stub("adder")
    store = {core.id: "pub unsafe fn renamed(a: i32, b: i32) -> i32 { a + b }"}
    text = apply_fallback(core, store)
    assert "fn adder(" in text  # name-normalized
    assert "unsafe" in text
    with pytest.raises(FallbackMissing):
        apply_fallback(core, {})


def test_ensure_unsafe_marked_wraps_plain_fn():
    marked = ensure_unsafe_marked("pub fn plain(a: i32) -> i32 { a }")
    assert unsafe_line_spans(marked)
    already = "pub unsafe fn u(a: i32) -> i32 { a }"
    assert ensure_unsafe_marked(already) == already


def test_naive_transpiler_chain_example(tmp_path):
    src = """int c(void)
{
    return 0;
}
int b(void)
{
    return c();
}
int a(void)
{
    return b();
}
"""
    ir = parse_module(write_module(tmp_path, {"chain.c": src}))
    store = make_fallback_store(ir.functions)
    assert set(store) == {u.id for u in ir.functions}
    a_text = store[next(u.id for u in ir.functions if u.name == "a")]
    assert a_text.startswith("pub unsafe fn a(")
    assert "b()" in a_text.replace(" ", "")
    assert compile_check(list(store.values())) == []


def test_naive_transpiler_control_flow(tmp_path):
    src = """unsigned int spin(unsigned int n)
{
    unsigned int acc = 0;
    unsigned int i;
    for (i = 0; i < n; i++) {
        acc = acc + i * i;
        if (acc > 1000) {
            acc = acc % 97;
        } else {
            acc = acc + 1;
        }
    }
    while (acc > 50) {
        acc = acc - 50;
    }
    return acc;
}
"""
    ir = parse_module(write_module(tmp_path, {"s.c": src}))
    text = naive_transpile(ir.functions[0])
    assert compile_check([text]) == []
    assert text.startswith("pub unsafe fn spin(")


def test_monotone_csr_accepted_rounds_compile():
    # a repaired unit never regresses: accepted rounds must compile
    unit = failing_unit("adder", BROKEN)
    outcome = repair(unit, ListBackend([rust(FIXED)]), cap=3)
    compiled_flags = []
    u = outcome.final_unit
    compiled_flags.append(u.status == "compiles")
    assert compiled_flags == sorted(compiled_flags)
    assert compile_check([it.text for it in u.items]) == []
