import json

import pytest

from migratekit.c_frontend import parse_module
from migratekit.context_prober import CodebaseIndex, probe_context
from migratekit.errors import BackendUnavailable, FixtureMiss
from migratekit.prompts import prompt_sha256, render_translation_prompt
from migratekit.translator import (
    LazinessConfig,
    ReplayBackend,
    LiveHttpBackend,
    check_syntax,
    detect_laziness,
    extract_code,
    extract_core_item,
    translate,
)

from conftest import FIXTURES, write_module


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


@pytest.fixture()
def sample_unit(tmp_path):
    files = {
        "s.h": "#define BIAS 7\nint helper(int v);\n",
        "s.c": """#include "s.h"
int shift_add(int a)
{
    int b = helper(a);
    return b + BIAS;
}
""",
    }
    ir = parse_module(write_module(tmp_path, files))
    index = CodebaseIndex.build(ir)
    core = next(u for u in ir.functions if u.name == "shift_add")
    unit, _, _, _ = probe_context(core, ir, index)
    return unit


def test_prompt_blocks_in_order(sample_unit):
    p = render_translation_prompt(sample_unit, ("no std",))
    assert p.index("## Code context") < p.index("## Translation guidelines")
    assert p.index("## Translation guidelines") < p.index("## Project requirements")
    assert "- no std" in p
    assert "int shift_add(int a)" in p


def test_prompt_empty_context_marked(tmp_path):
    ir = parse_module(
        write_module(tmp_path, {"p.c": "int id_fn(int v)\n{\n    return v;\n}\n"})
    )
    index = CodebaseIndex.build(ir)
    unit, _, _, _ = probe_context(ir.functions[0], ir, index)
    p = render_translation_prompt(unit)
    assert p.count("(none)") >= 3


def test_prompt_deterministic(sample_unit):
    a = render_translation_prompt(sample_unit, ("r1", "r2"))
    b = render_translation_prompt(sample_unit, ("r1", "r2"))
    assert a == b
    assert prompt_sha256(a) == prompt_sha256(b)


def test_prompt_matches_golden(mini_run):
    module = mini_run.module()
    index = CodebaseIndex.build(module)
    core = module.unit(str(FIXTURES / "mini_c" / "ringstat.c") + "::ring_next")
    unit, _, _, _ = probe_context(core, module, index)
    got = render_translation_prompt(unit, ("Do not use the `std` crate.",))
    golden = (FIXTURES / "golden" / "translation_prompt.txt").read_text()
    assert got == golden


def test_translate_first_try(sample_unit):
    backend = ListBackend(["```rust\nfn shift_add(a: i32) -> i32 { a + 7 }\n```"])
    tf = translate(sample_unit, backend)
    assert tf.status == "syntax-ok"
    assert tf.attempts == 1
    assert check_syntax(tf.rust_text) == []


def test_translate_two_bad_then_good(sample_unit):
    backend = ListBackend(
        [
            "```rust\nfn shift_add( {\n```",
            "```rust\nfn shift_add(a: i32) -> i32 {\n```",
            "```rust\nfn shift_add(a: i32) -> i32 { a + 7 }\n```",
        ]
    )
    tf = translate(sample_unit, backend, retry_cap=3)
    assert tf.status == "syntax-ok"
    assert tf.attempts == 3


def test_translate_cap_exhaustion(sample_unit):
    backend = ListBackend(["fn bad( {"] * 3)
    tf = translate(sample_unit, backend, retry_cap=3)
    assert tf.status == "syntax-failed"
    assert tf.attempts == 3
    assert tf.rust_text  # last output attached


def test_replay_backend_consumes_in_order_and_misses(tmp_path, sample_unit):
    prompt = render_translation_prompt(sample_unit)
    fixture = {prompt_sha256(prompt): ["first", "second"]}
    path = tmp_path / "replay.json"
    path.write_text(json.dumps(fixture))
    backend = ReplayBackend(path)
    assert backend.complete(prompt, unit=sample_unit) == "first"
    assert backend.complete(prompt, unit=sample_unit) == "second"
    with pytest.raises(FixtureMiss):
        backend.complete(prompt, unit=sample_unit)
    with pytest.raises(FixtureMiss):
        backend.complete("unknown prompt", unit=sample_unit)


def test_live_backend_unreachable():
    backend = LiveHttpBackend("http://127.0.0.1:1/v1/chat", "m", timeout=0.2)
    with pytest.raises(BackendUnavailable):
        backend.complete("hello")


def test_check_syntax_examples():
    assert check_syntax("fn f() -> i32 { 0 }") == []
    issues = check_syntax("fn f( { }")
    assert len(issues) == 1
    assert issues[0].line == 1
    issues2 = check_syntax("fn f() -> i32 { let x = (1; x }")
    assert issues2


def test_mini_corpus_syntax_ok_sweep(mini_run):
    for core in sorted((mini_run.ws.root / "functions").glob("*.core.rs")):
        assert check_syntax(core.read_text()) == [], core.name


def test_extract_code_fenced_and_bare():
    assert extract_code("```rust\nfn f() {}\n```") == "fn f() {}\n"
    assert extract_code("```\nfn f() {}\n```") == "fn f() {}\n"
    assert extract_code("fn f() {}") == "fn f() {}"


def test_extract_core_item_discards_extras_and_renames():
    code = """
struct Extra { x: i32 }

fn renamed_thing(v: i32) -> i32 { v }

fn other() {}
"""
    item = extract_core_item(code, "core_name")
    assert item is not None
    assert item.startswith("fn core_name(") or "fn core_name" in item
    assert "struct Extra" not in item
    code2 = "fn exact_name(v: i32) -> i32 { v }\nfn other() {}"
    assert "fn exact_name" in extract_core_item(code2, "exact_name")


def test_detect_laziness_faithful_not_lazy():
    c = "int f(int x)\n{\n" + "".join(f"    x = x + {i};\n" for i in range(11)) + "    return x;\n}\n"
    r = "fn f(mut x: i32) -> i32 {\n" + "".join(f"    x = x + {i};\n" for i in range(11)) + "    return x;\n}\n"
    v = detect_laziness(c, r)
    assert not v.lazy
    assert v.evidence == ()


def test_detect_laziness_placeholder_rule():
    c = "int f(int x)\n{\n    x = x + 1;\n    return x;\n}\n"
    r = "fn f(mut x: i32) -> i32 {\n    // ... rest of the implementation\n    x\n}\n"
    v = detect_laziness(c, r)
    assert v.lazy
    assert any(e["rule"] == "placeholder-comment" for e in v.evidence)


def test_detect_laziness_ratio_rule():
    c = "int f(int x)\n{\n" + "".join(f"    x = x + {i};\n" for i in range(40)) + "}\n"
    r = (
        "fn f(mut x: i32) -> i32 {\n"
        "    x = x * 2;\n    x = x + 1;\n    x = x - 3;\n"
        "    x = x ^ 2;\n    x = x | 1;\n    x\n}\n"
    )
    v = detect_laziness(c, r)
    assert v.lazy
    ratio_ev = [e for e in v.evidence if e["rule"] == "statement-ratio"]
    assert len(ratio_ev) == 1
    assert ratio_ev[0]["c_statements"] >= 40
    assert ratio_ev[0]["ratio"] < 0.4


def test_detect_laziness_configurable():
    c = "int f(int x)\n{\n    x = x + 1;\n    return x;\n}\n"
    r = "fn f(mut x: i32) -> i32 {\n    // totally custom marker\n    x\n}\n"
    assert not detect_laziness(c, r).lazy
    cfg = LazinessConfig(placeholder_patterns=("custom marker",))
    assert detect_laziness(c, r, cfg).lazy


def test_labeled_corpus_full_agreement():
    pairs = json.loads((FIXTURES / "laziness_labeled.json").read_text())
    assert len(pairs) >= 40
    for p in pairs:
        v = detect_laziness(p["c"], p["rust"])
        assert v.lazy == p["lazy"], p["name"]
