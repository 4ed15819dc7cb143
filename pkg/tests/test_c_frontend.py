import pytest
from hypothesis import given, settings, strategies as st

from migratekit.c_frontend import (
    build_call_graph,
    callgraph_to_json,
    leaves_first_schedule,
    parse_module,
)
from migratekit.errors import IoError, ParseError

from callgraph_oracle import brute_sccs, gen_module, oracle_graph
from conftest import write_module

CHAIN = """int a(void)
{
    return b();
}
int b(void)
{
    return c();
}
int c(void)
{
    return 0;
}
int b(void);
int c(void);
"""


def chain_ir(tmp_path):
    paths = write_module(tmp_path, {"chain.c": CHAIN})
    return parse_module(paths)


def test_chain_has_three_units(tmp_path):
    ir = chain_ir(tmp_path)
    assert [u.name for u in ir.functions] == ["a", "b", "c"]


def test_define_only_file(tmp_path):
    paths = write_module(tmp_path, {"only.c": "#define X 1\n"})
    ir = parse_module(paths)
    assert ir.functions == []
    assert len(ir.declarations) == 1
    assert ir.declarations[0].entries == (("X", "macro"),)


def test_unit_invariants(tmp_path):
    ir = chain_ir(tmp_path)
    for u in ir.functions:
        assert not (u.locals & u.referenced)
        assert u.line_count == u.body_span[1] - u.body_span[0] + 1 >= 1


def test_body_text_is_exact_line_slice(tmp_path):
    ir = chain_ir(tmp_path)
    text = ir.files[0].text
    lines = text.splitlines(keepends=True)
    for u in ir.functions:
        lo, hi = u.body_span
        assert u.body_text == "".join(lines[lo - 1 : hi])


def test_round_trip_reconstruction(tmp_path):
    paths = write_module(tmp_path, {"chain.c": CHAIN})
    ir = parse_module(paths)
    for sf in ir.files:
        lines = sf.text.splitlines(keepends=True)
        units = sorted(
            (u for u in ir.functions if u.file == sf.path), key=lambda u: u.body_span
        )
        pieces = []
        ln = 1
        for u in units:
            lo, hi = u.body_span
            pieces.extend(lines[ln - 1 : lo - 1])
            pieces.append(u.body_text)
            ln = hi + 1
        pieces.extend(lines[ln - 1 :])
        assert "".join(pieces) == sf.text


def test_single_function_graph(tmp_path):
    paths = write_module(tmp_path, {"one.c": "int lone(int v)\n{\n    return v;\n}\n"})
    ir = parse_module(paths)
    g = build_call_graph(ir)
    fid = ir.functions[0].id
    assert g.nodes == {fid}
    assert g.edges == frozenset()
    assert leaves_first_schedule(g) == [[fid]]


def test_chain_edges_and_schedule(tmp_path):
    ir = chain_ir(tmp_path)
    g = build_call_graph(ir)
    ids = {u.name: u.id for u in ir.functions}
    assert g.edges == {(ids["a"], ids["b"]), (ids["b"], ids["c"])}
    assert leaves_first_schedule(g) == [[ids["c"]], [ids["b"]], [ids["a"]]]


def test_mutual_recursion_single_group(tmp_path):
    src = """int g(int n);
int f(int n)
{
    return g(n - 1);
}
int g(int n)
{
    return f(n - 1);
}
"""
    ir = parse_module(write_module(tmp_path, {"mr.c": src}))
    g = build_call_graph(ir)
    sched = leaves_first_schedule(g)
    assert len(sched) == 1
    assert sorted(sched[0]) == sorted(u.id for u in ir.functions)


def test_no_edges_path_line_tiebreak(tmp_path):
    src = "int x(void)\n{\n    return 1;\n}\nint y(void)\n{\n    return 2;\n}\n"
    ir = parse_module(write_module(tmp_path, {"t.c": src}))
    g = build_call_graph(ir)
    ids = {u.name: u.id for u in ir.functions}
    assert leaves_first_schedule(g) == [[ids["x"]], [ids["y"]]]


def test_diamond_schedule_positions(tmp_path):
    src = """int d(void)
{
    return 4;
}
int b(void)
{
    return d();
}
int c(void)
{
    return d();
}
int a(void)
{
    return b() + c();
}
"""
    ir = parse_module(write_module(tmp_path, {"dia.c": src}))
    g = build_call_graph(ir)
    sched = leaves_first_schedule(g)
    pos = {fid: i for i, grp in enumerate(sched) for fid in grp}
    ids = {u.name: u.id for u in ir.functions}
    assert pos[ids["d"]] < pos[ids["b"]]
    assert pos[ids["d"]] < pos[ids["c"]]
    assert pos[ids["a"]] == len(sched) - 1


def test_self_recursion_self_loop_scc(tmp_path):
    src = "int f(int n)\n{\n    if (n == 0) {\n        return 1;\n    }\n    return f(n - 1);\n}\n"
    ir = parse_module(write_module(tmp_path, {"r.c": src}))
    g = build_call_graph(ir)
    fid = ir.functions[0].id
    assert (fid, fid) in g.edges
    assert leaves_first_schedule(g) == [[fid]]


def test_external_and_pointer_calls(tmp_path):
    src = """int use(int (*cb)(int), int v)
{
    int r = cb(v);
    r = r + missing_fn(v);
    return r;
}
"""
    ir = parse_module(write_module(tmp_path, {"p.c": src}))
    g = build_call_graph(ir)
    fid = ir.functions[0].id
    assert g.edges == frozenset()
    assert g.external_calls[fid] == {"cb", "missing_fn"}


def test_macro_body_calls_flagged_not_edges(tmp_path):
    src = """#define RUN(x) helper(x)
int helper(int v)
{
    return v;
}
int top(int v)
{
    return RUN(v);
}
"""
    ir = parse_module(write_module(tmp_path, {"m.c": src}))
    g = build_call_graph(ir)
    ids = {u.name: u.id for u in ir.functions}
    assert (ids["top"], ids["helper"]) not in g.edges
    assert (ids["top"], "helper") in g.via_macro_edges
    assert '"via_macro": true' in callgraph_to_json(g)


def test_determinism(tmp_path):
    files, _, _ = gen_module(1234)
    paths = write_module(tmp_path, files)
    ir1, ir2 = parse_module(paths), parse_module(paths)
    assert [u.__dict__ for u in ir1.functions] == [u.__dict__ for u in ir2.functions]
    g1, g2 = build_call_graph(ir1), build_call_graph(ir2)
    assert callgraph_to_json(g1) == callgraph_to_json(g2)
    assert leaves_first_schedule(g1) == leaves_first_schedule(g2)


def test_parse_errors():
    with pytest.raises(IoError):
        parse_module(["/nonexistent/path/nowhere.c"])


def test_unbalanced_brace_raises(tmp_path):
    paths = write_module(tmp_path, {"bad.c": "int f(void)\n{\n    return 0;\n"})
    with pytest.raises(ParseError):
        parse_module(paths)


def test_shared_line_raises(tmp_path):
    paths = write_module(
        tmp_path, {"bad.c": "int f(void) { return 0; } int g(void) { return 1; }\n"}
    )
    with pytest.raises(ParseError) as e:
        parse_module(paths)
    assert "shares a source line" in str(e.value)


def test_pp_inside_declaration_raises(tmp_path):
    paths = write_module(
        tmp_path, {"bad.c": "int f(void)\n#define MID 1\n{\n    return 0;\n}\n"}
    )
    with pytest.raises(ParseError):
        parse_module(paths)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10**9))
def test_generated_modules_match_oracle(tmp_path_factory, seed):
    files, truth_names, truth_edges = gen_module(seed)
    tmp = tmp_path_factory.mktemp("gen")
    paths = write_module(tmp, files)
    ir = parse_module(paths)
    g = build_call_graph(ir)
    by_name = {u.name: u.id for u in ir.functions}
    assert set(by_name) == truth_names
    got_edges = {(a.rsplit("::", 1)[1], b.rsplit("::", 1)[1]) for a, b in g.edges}
    assert got_edges == truth_edges
    oracle_names, oracle_edges, _ = oracle_graph(files)
    assert oracle_names == truth_names
    assert oracle_edges == truth_edges
    # schedule soundness: callee groups come first across SCCs
    sched = leaves_first_schedule(g)
    pos = {fid: i for i, grp in enumerate(sched) for fid in grp}
    for a, b in g.edges:
        if pos[a] != pos[b]:
            assert pos[b] < pos[a]
    # SCC groups match brute-force reachability groups
    impl_groups = {
        frozenset(fid.rsplit("::", 1)[1] for fid in grp) for grp in sched
    }
    assert impl_groups == brute_sccs(truth_names, truth_edges)
