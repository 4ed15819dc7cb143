import itertools

import pytest

from migratekit.errors import ConflictingDefinition
from migratekit.fusor import fuse_module, fuse_step
from migratekit.rust_prober import ProbeItem, ResolvedUnit, compile_check

SHARED_CONST = ProbeItem("LIM", "pub const LIM: u32 = 9;", "catalog", "macro-const")
SHARED_STRUCT = ProbeItem(
    "pair",
    "#[repr(C)]\npub struct pair {\n    pub a: i32,\n    pub b: i32,\n}",
    "catalog",
    "type",
)


def unit(name: str, text: str, context=(), status="compiles") -> ResolvedUnit:
    return ResolvedUnit(
        core_id=f"m.c::{name}",
        items=tuple(context) + (ProbeItem(name, text, "translated"),),
        diagnostics=(),
        iterations_used=1,
        status=status,
    )


def test_shared_struct_deduplicated():
    u1 = unit("area", "pub fn area(p: &pair) -> i32 { p.a * p.b }", (SHARED_STRUCT,))
    u2 = unit(
        "perim",
        "pub fn perim(p: &pair) -> i32 { 2 * (p.a + p.b) + area(p) }",
        (SHARED_STRUCT, u1.core_item),
    )
    merged = fuse_step(parent=u2, child=u1)
    names = [it.name for it in merged.items]
    assert names.count("pair") == 1
    assert names.count("area") == 1


def test_chain_fuse_matches_manual_assembly():
    c = unit("c", "pub fn c() -> u32 { LIM }", (SHARED_CONST,))
    b = unit("b", "pub fn b() -> u32 { c() + 1 }", (SHARED_CONST, c.core_item))
    a = unit("a", "pub fn a() -> u32 { b() + 1 }", (b.core_item,))
    module = fuse_module([["m.c::c"], ["m.c::b"], ["m.c::a"]],
                         {"m.c::c": c, "m.c::b": b, "m.c::a": a})
    names = [it.name for it in module.items]
    assert names == ["LIM", "c", "b", "a"]
    assert module.status == "compiles"
    assert len(module.fusion_log) == 3
    # oracle: hand-assembled module compiles identically
    manual = [SHARED_CONST.text, c.core_item.text, b.core_item.text, a.core_item.text]
    assert compile_check(manual) == []


def test_conflicting_definition_raised_in_fuse_step():
    u1 = unit("helper", "pub fn helper() -> u32 { 1 }")
    u2 = unit(
        "top",
        "pub fn top() -> u32 { helper() }",
        (ProbeItem("helper", "pub fn helper() -> u32 { 2 }", "translated"),),
    )
    with pytest.raises(ConflictingDefinition):
        fuse_step(parent=u2, child=u1)


def test_fuse_module_surfaces_conflict_never_silent():
    u1 = unit("helper", "pub fn helper() -> u32 { 1 }")
    u2 = unit(
        "top",
        "pub fn top() -> u32 { helper() }",
        (ProbeItem("helper", "pub fn helper() -> u32 { 2 }", "translated"),),
    )
    module = fuse_module([["m.c::helper"], ["m.c::top"]],
                         {"m.c::helper": u1, "m.c::top": u2})
    assert module.status == "has-conflicts"
    assert module.conflicts == [
        {"name": "helper", "kept_from": "m.c::helper", "rejected_from": "m.c::top"}
    ]
    # the kept copy is the accumulator's (child's / earlier) version
    assert module.item("helper").text.endswith("{ 1 }")


def test_identical_duplicates_are_not_conflicts():
    shared_fn = ProbeItem("leaf", "pub fn leaf() -> u32 { 5 }", "translated")
    u1 = unit("leaf", "pub fn leaf() -> u32 { 5 }")
    u2 = unit("top", "pub fn top() -> u32 { leaf() }", (shared_fn,))
    module = fuse_module([["m.c::leaf"], ["m.c::top"]],
                         {"m.c::leaf": u1, "m.c::top": u2})
    assert module.conflicts == []
    assert [it.name for it in module.items] == ["leaf", "top"]


def test_translated_vs_catalog_type_prefers_catalog():
    translated_pair = ProbeItem("pair", "pub struct pair { pub a: i32 }", "translated", "type")
    u1 = unit("f1", "pub fn f1() -> i32 { 0 }", (SHARED_STRUCT,))
    u2 = unit("f2", "pub fn f2() -> i32 { 1 }", (translated_pair,))
    merged = fuse_step(parent=u2, child=u1)
    pair_items = [it for it in merged.items if it.name == "pair"]
    assert len(pair_items) == 1
    assert pair_items[0].provenance == "catalog"


def test_item_set_equality_and_order_insensitivity():
    c = unit("c", "pub fn c() -> u32 { LIM }", (SHARED_CONST,))
    b = unit("b", "pub fn b() -> u32 { c() + 1 }", (SHARED_CONST, c.core_item))
    a = unit("a", "pub fn a() -> u32 { b() + c() }", (b.core_item, c.core_item))
    units = {"m.c::c": c, "m.c::b": b, "m.c::a": a}
    expected_names = {"LIM", "a", "b", "c"}
    results = set()
    for perm in itertools.permutations([["m.c::c"], ["m.c::b"], ["m.c::a"]], 3):
        sched = list(perm)
        module = fuse_module(sched, units, compile_each_step=False)
        names = frozenset(it.name for it in module.items)
        assert names == expected_names
        results.add((module.status, names))
    assert len({r[1] for r in results}) == 1


def test_manual_required_unit_passes_through_with_red_log():
    broken = unit("bad", "pub fn bad() -> u32 { nothing_here() }",
                  status="manual-required")
    good = unit("fine", "pub fn fine() -> u32 { 3 }")
    module = fuse_module([["m.c::fine"], ["m.c::bad"]],
                         {"m.c::fine": good, "m.c::bad": broken})
    assert module.status == "has-errors"
    assert module.item("bad").text == "pub fn bad() -> u32 { nothing_here() }"
    red = [e for e in module.fusion_log if not e["compiles"]]
    assert red and red[ize := -1]["merged"] == "m.c::bad"


def test_single_unit_module_one_log_entry():
    only = unit("solo", "pub fn solo() -> u32 { 7 }")
    module = fuse_module([["m.c::solo"]], {"m.c::solo": only})
    assert [it.name for it in module.items] == ["solo"]
    assert len(module.fusion_log) == 1
    assert module.status == "compiles"


def test_log_counts_merge_steps():
    c = unit("c", "pub fn c() -> u32 { 0 }")
    b = unit("b", "pub fn b() -> u32 { c() }", (c.core_item,))
    a = unit("a", "pub fn a() -> u32 { b() }", (b.core_item,))
    module = fuse_module([["m.c::c"], ["m.c::b"], ["m.c::a"]],
                         {"m.c::c": c, "m.c::b": b, "m.c::a": a})
    merge_entries = [e for e in module.fusion_log if e["step"] > 1]
    assert len(merge_entries) == len(module.fusion_log) - 1 == 2
