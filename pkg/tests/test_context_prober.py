import pytest

from migratekit.c_frontend import parse_module
from migratekit.context_prober import (
    CodebaseIndex,
    SymbolRef,
    assemble_context,
    assemble_context_fitting,
    collect_unresolved,
    global_search,
    probe_context,
    render_ctx_c,
)
from migratekit.errors import AmbiguousSymbol, ContextBudgetExceeded, SymbolNotFound

from conftest import write_module

KERNELISH = {
    "mem.h": """#define PAGE_SIZE 4096
struct page {
    unsigned long flags;
    int refcount;
};
void *kmalloc(unsigned long size, int flags);
""",
    "use.c": """#include "mem.h"
int local_only(int a, int b)
{
    int c = a + b;
    return c * 2;
}
unsigned long grab(struct page *pg)
{
    void *buf = kmalloc(PAGE_SIZE, 0);
    if (!buf) {
        return 0;
    }
    return pg->flags + PAGE_SIZE;
}
""",
}


def build(tmp_path, files):
    ir = parse_module(write_module(tmp_path, files))
    return ir, CodebaseIndex.build(ir)


def unit_named(ir, name):
    return next(u for u in ir.functions if u.name == name)


def test_params_only_function_resolves_nothing(tmp_path):
    ir, _ = build(tmp_path, KERNELISH)
    refs = collect_unresolved(unit_named(ir, "local_only"), ir)
    assert refs == []


def test_macro_and_called_function_kinds(tmp_path):
    ir, _ = build(tmp_path, KERNELISH)
    refs = collect_unresolved(unit_named(ir, "grab"), ir)
    kinds = {r.name: r.kind for r in refs}
    assert kinds["PAGE_SIZE"] == "macro"
    assert kinds["kmalloc"] == "function"
    assert kinds["page"] == "type"
    assert kinds["flags"] == "field-unknown"


def test_global_search_prototype_is_body_free(tmp_path):
    files = {
        "s.c": """int sort(int *arr, int n)
{
    int i = n;
    return arr[0] + i;
}
int caller(int *arr)
{
    return sort(arr, 4);
}
"""
    }
    ir, index = build(tmp_path, files)
    caller = unit_named(ir, "caller")
    decl = global_search(SymbolRef("sort", "function", caller.id), index, caller.file)
    assert "{" not in decl.decl_text
    assert decl.decl_text.endswith(";")
    assert decl.decl_text.startswith("int sort(")


def test_global_search_struct_text_verbatim(tmp_path):
    ir, index = build(tmp_path, KERNELISH)
    grab = unit_named(ir, "grab")
    decl = global_search(SymbolRef("page", "type", grab.id), index, grab.file)
    assert decl.decl_text == "struct page {\n    unsigned long flags;\n    int refcount;\n};"
    assert decl.source[0].endswith("mem.h")


def test_global_search_missing_symbol(tmp_path):
    ir, index = build(tmp_path, KERNELISH)
    grab = unit_named(ir, "grab")
    with pytest.raises(SymbolNotFound):
        global_search(SymbolRef("never_defined", "variable", grab.id), index, grab.file)


def test_two_header_ambiguity_resolved_and_logged(tmp_path):
    files = {
        "near.h": "#define LIMIT 10\n",
        "far.h": "#define LIMIT 99\n",
        "u.c": """#include "near.h"
int use_limit(int v)
{
    return v + LIMIT;
}
""",
    }
    ir, index = build(tmp_path, files)
    u = unit_named(ir, "use_limit")
    log = []
    decl = global_search(SymbolRef("LIMIT", "macro", u.id), index, u.file, log)
    assert decl.source[0].endswith("near.h")  # directly-included header wins
    assert len(log) == 1 and len(log[0]["candidates"]) == 2
    with pytest.raises(AmbiguousSymbol):
        global_search(SymbolRef("LIMIT", "macro", u.id), index, u.file, strict=True)


def test_assemble_empty_context(tmp_path):
    ir, index = build(tmp_path, KERNELISH)
    unit = assemble_context(unit_named(ir, "local_only"), [], index=index)
    assert unit.types_and_macros == ()
    assert unit.external_variables == ()
    assert unit.called_functions == ()
    assert unit.context_line_count == 0


def test_assemble_orders_and_counts(tmp_path):
    ir, index = build(tmp_path, KERNELISH)
    grab = unit_named(ir, "grab")
    unit, unresolved, warnings, _ = probe_context(grab, ir, index)
    rendered = render_ctx_c(unit)
    assert rendered.index("types and macros") < rendered.index("external variables")
    assert rendered.index("external variables") < rendered.index("called functions")
    assert rendered.index("called functions") < rendered.index("code to be converted")
    names = [d.symbol.name for d in unit.declarations()]
    assert "PAGE_SIZE" in names and "page" in names and "kmalloc" in names
    assert unit.context_line_count == sum(d.line_count() for d in unit.declarations())
    assert [u["name"] for u in unresolved] == ["flags"]
    assert warnings == []


def test_budget_exceeded_example(tmp_path):
    src = "int big(int v)\n{\n" + "".join(
        f"    v = v + {i};\n" for i in range(148)
    ) + "    return v;\n}\n"
    hdr = "\n".join(f"#define PAD_{i} {i}" for i in range(80)) + "\n"
    files = {"big.h": hdr, "big.c": f'#include "big.h"\n{src}'}
    ir, index = build(tmp_path, files)
    big = unit_named(ir, "big")
    assert big.line_count >= 150
    decls = [
        global_search(SymbolRef(f"PAD_{i}", "macro", big.id), index, big.file)
        for i in range(80)
    ]
    with pytest.raises(ContextBudgetExceeded):
        assemble_context(big, decls, budget=200)


def test_fitting_drops_variables_last_in_first_out(tmp_path):
    files = {
        "vars.h": "".join(f"int var_{i} = {i};\n" for i in range(6)),
        "v.c": """#include "vars.h"
int sum_all(int x)
{
    return x + var_0 + var_1 + var_2 + var_3 + var_4 + var_5;
}
""",
    }
    ir, index = build(tmp_path, files)
    u = unit_named(ir, "sum_all")
    decls = [
        global_search(SymbolRef(f"var_{i}", "variable", u.id), index, u.file)
        for i in range(6)
    ]
    unit, warnings = assemble_context_fitting(u, decls, budget=u.line_count + 3)
    kept = [d.symbol.name for d in unit.external_variables]
    assert kept == ["var_0", "var_1", "var_2"]  # later entries dropped first
    assert len(warnings) == 3
    assert all("dropped variable declaration" in w for w in warnings)


def test_closure_pulls_transitive_types(tmp_path):
    files = {
        "t.h": """typedef unsigned long word_t;
struct holder {
    word_t value;
};
""",
        "t.c": """#include "t.h"
unsigned long read_value(struct holder *h)
{
    return h->value;
}
""",
    }
    ir, index = build(tmp_path, files)
    u = unit_named(ir, "read_value")
    unit, unresolved, _, _ = probe_context(u, ir, index)
    names = {d.symbol.name for d in unit.types_and_macros}
    assert {"holder", "word_t"} <= names  # word_t pulled via closure


def test_closure_invariant_types_subset(tmp_path):
    ir, index = build(tmp_path, KERNELISH)
    grab = unit_named(ir, "grab")
    unit, _, _, _ = probe_context(grab, ir, index)
    included = {d.symbol.name for d in unit.declarations()}
    module_types = ir.type_names() | ir.macro_names()
    for d in unit.declarations():
        from migratekit.c_lexer import tokenize

        for t in tokenize(d.decl_text, "x"):
            if t.kind == "ident" and t.text in module_types:
                assert t.text in included or t.text == d.symbol.name


def test_idempotence(tmp_path):
    ir, index = build(tmp_path, KERNELISH)
    grab = unit_named(ir, "grab")
    unit, _, _, _ = probe_context(grab, ir, index)
    again = assemble_context(grab, list(unit.declarations()), index=index)
    assert again == unit


def test_unresolved_completeness(tmp_path):
    ir, index = build(tmp_path, KERNELISH)
    grab = unit_named(ir, "grab")
    unit, unresolved, _, _ = probe_context(grab, ir, index)
    resolved_names = {d.symbol.name for d in unit.declarations()}
    unresolved_names = {u["name"] for u in unresolved}
    refs = {r.name for r in collect_unresolved(grab, ir)}
    assert resolved_names | unresolved_names >= refs
    assert not (resolved_names & unresolved_names)


def test_body_exclusion_on_assembled_units(mini_run):
    import json

    for slug_file in sorted((mini_run.ws.root / "functions").glob("*.unit.json")):
        data = json.loads(slug_file.read_text())
        for d in data["called_functions"]:
            assert "{" not in d["decl_text"], f"{slug_file.name}: {d['name']}"
