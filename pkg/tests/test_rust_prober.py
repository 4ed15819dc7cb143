import pytest

from migratekit.c_frontend import parse_module
from migratekit.errors import ScaffoldError, ToolchainMissing
from migratekit.rust_prober import (
    RESOLUTION_CODES,
    CatalogEntry,
    ContextCatalog,
    ScaffoldConfig,
    compile_check,
    generate_catalog,
    lookup_definition,
    probe,
)
from migratekit.translator import LazinessVerdict, TranslatedFunction

from conftest import write_module


def tf(name: str, text: str, status: str = "syntax-ok") -> TranslatedFunction:
    return TranslatedFunction(f"m.c::{name}", text, 1, LazinessVerdict(False, ()), status)


def test_compile_check_self_contained():
    assert compile_check(["fn f() -> i32 { 0 }"]) == []


def test_compile_check_unresolved_symbol():
    diags = compile_check(["fn f() -> i32 { helper() }"])
    assert len(diags) == 1
    d = diags[0]
    assert d.code == "E0425"
    assert d.is_resolution()
    assert d.primary_symbol == "helper"
    assert d.span is not None and d.span[0] == "unit.rs"


def test_compile_check_type_mismatch_e0308():
    diags = compile_check(["fn g() -> u32 { let x: u32 = 1i64; x }"])
    assert [d.code for d in diags] == ["E0308"]
    assert not diags[0].is_resolution()


def test_compile_check_unsigned_negation_is_type_class():
    # the classic `let x: u32 = -1;` trap: an error, but never resolution-class
    diags = compile_check(["fn g() { let x: u32 = -1; }"])
    assert diags
    assert all(not d.is_resolution() for d in diags)


def test_compile_check_invalid_item_precondition():
    with pytest.raises(ScaffoldError):
        compile_check(["fn broken( {"])


def test_toolchain_missing():
    cfg = ScaffoldConfig(rustc="definitely-not-a-real-rustc")
    with pytest.raises(ToolchainMissing):
        compile_check(["fn f() {}"], cfg)


def test_no_std_scaffold_header():
    cfg = ScaffoldConfig(no_std=True)
    assert cfg.header().startswith("#![no_std]\n")
    assert compile_check(["fn f() -> i32 { 41 + 1 }"], cfg) == []


def test_lookup_precedence():
    catalog = ContextCatalog(
        (
            CatalogEntry("thing", "extern-fn", 'extern "C" {\n    pub fn thing();\n}'),
            CatalogEntry("thing", "type", "pub struct thing;"),
            CatalogEntry("only_cat", "variable", "pub static mut only_cat: u32 = 0;"),
        )
    )
    callees = {"thing": "fn thing() {}"}
    text, provenance, kind = lookup_definition("thing", catalog, callees)
    assert provenance == "translated"  # callees win
    text2, prov2, kind2 = lookup_definition("thing", catalog, {})
    assert prov2 == "catalog" and kind2 == "type"  # type outranks extern-fn
    assert lookup_definition("only_cat", catalog, {})[2] == "variable"
    assert lookup_definition("absent", catalog, {}) is None


def test_probe_no_free_symbols():
    unit = probe(tf("f", "fn f() -> i32 { 0 }"), ContextCatalog.empty(), {})
    assert unit.status == "compiles"
    assert unit.iterations_used == 1
    assert [it.name for it in unit.items] == ["f"]


def test_probe_pulls_translated_leaf():
    callees = {"c": "fn c() -> i32 { 0 }"}
    unit = probe(tf("b", "fn b() -> i32 { c() }"), ContextCatalog.empty(), callees)
    assert unit.status == "compiles"
    assert unit.iterations_used == 2
    assert [it.name for it in unit.items] == ["c", "b"]
    assert unit.items[0].provenance == "translated"


def test_probe_unresolved_no_progress():
    unit = probe(tf("z", "fn z() -> u32 { missing_thing() }"), ContextCatalog.empty(), {})
    assert unit.status == "unresolved-remaining"
    assert any(d.primary_symbol == "missing_thing" for d in unit.diagnostics)


def test_probe_core_text_conserved_and_no_duplicates():
    code = "fn top() -> u32 { LIM + LIM + low() }"
    catalog = ContextCatalog((CatalogEntry("LIM", "macro-const", "pub const LIM: u32 = 3;"),))
    unit = probe(tf("top", code), catalog, {"low": "fn low() -> u32 { 1 }"})
    assert unit.core_item.text == code
    names = [it.name for it in unit.items]
    assert len(names) == len(set(names))
    assert unit.status == "compiles"


def test_probe_respects_max_iters():
    # a chain a->b->c->d forces one new item per iteration; cap cuts it short
    callees = {
        "b": "fn b() -> i32 { c() }",
        "c": "fn c() -> i32 { d() }",
        "d": "fn d() -> i32 { 0 }",
    }
    unit = probe(tf("a", "fn a() -> i32 { b() }"), ContextCatalog.empty(), callees,
                 max_iters=2)
    assert unit.iterations_used <= 2
    assert unit.status != "compiles"
    full = probe(tf("a", "fn a() -> i32 { b() }"), ContextCatalog.empty(), callees)
    assert full.status == "compiles"
    assert full.iterations_used <= 5


def test_lazy_callee_propagates():
    callees = {"c": "fn c() -> i32 { 0 }"}
    unit = probe(
        tf("b", "fn b() -> i32 { c() }"),
        ContextCatalog.empty(),
        callees,
        lazy_callee_names=frozenset(["c"]),
    )
    assert unit.lazy_callees == ("c",)


def test_resolution_code_set_matches_design():
    assert RESOLUTION_CODES == {
        "E0425", "E0412", "E0433", "E0609", "E0573", "E0574", "E0689"
    }


def test_generated_catalog_entries_parse_and_cover(tmp_path):
    files = {
        "g.h": """#define DEPTH 3
#define NAME_BIT 0x10
struct pair {
    int a;
    unsigned long b;
};
typedef unsigned long word_t;
extern int shared_count;
int external_helper(int v, unsigned long w);
""",
        "g.c": """#include "g.h"
int shared_count = 5;
int use_all(struct pair *p)
{
    return p->a + shared_count + DEPTH;
}
""",
    }
    ir = parse_module(write_module(tmp_path, files))
    catalog = generate_catalog(ir)
    by_key = {(e.name, e.kind): e for e in catalog.entries}
    assert ("DEPTH", "macro-const") in by_key
    assert ("NAME_BIT", "macro-const") in by_key
    assert ("pair", "type") in by_key
    assert "#[repr(C)]" in by_key[("pair", "type")].rust_text
    assert ("word_t", "type") in by_key
    assert ("shared_count", "variable") in by_key
    assert ("external_helper", "extern-fn") in by_key
    assert ("use_all", "extern-fn") not in by_key  # module functions excluded
    # every entry already validated by the constructor; compile them together
    assert compile_check([e.rust_text for e in catalog.entries]) == []


def test_catalog_roundtrip_and_duplicate_rejection(tmp_path):
    entries = (CatalogEntry("A", "macro-const", "pub const A: u32 = 1;"),)
    cat = ContextCatalog(entries)
    path = tmp_path / "catalog.json"
    cat.save(path)
    assert ContextCatalog.load(path) == cat
    with pytest.raises(ValueError):
        ContextCatalog(entries + entries)
    with pytest.raises(ValueError):
        ContextCatalog((CatalogEntry("B", "type", "struct B {"),))


def test_mini_corpus_probe_within_five_iterations(mini_run):
    state = mini_run.state.data
    for fid, st in state["functions"].items():
        assert st["probe_status"] == "compiles", fid
        assert st["probe_iterations"] <= 5, fid
