"""Pipeline driver: persistence, resumability, lane isolation, review.

Workspace layout (fixed):
    workdir/
      callgraph.json
      catalog.json
      functions/<slug>.{c,unit.json,ctx.c,unresolved.json,core.rs,
                        rs.attempt<N>,resolved.rs,resolved.json,
                        diag.jsonl,repair.jsonl}
      scratch/<slug>/
      module.rs  fusion_log.json  conflicts.json  report.json  report.md
      state.json
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

from . import metrics
from .c_frontend import (
    CallGraph,
    FunctionUnit,
    ModuleIR,
    build_call_graph,
    callgraph_to_json,
    leaves_first_schedule,
    parse_module,
)
from .codebleu import codebleu
from .config import Config
from .context_prober import (
    CodebaseIndex,
    Declaration,
    SymbolRef,
    TranslationUnit,
    probe_context,
    render_ctx_c,
    unresolved_report_json,
)
from .errors import MigrateKitError, MissingPrerequisite, ParseFailed
from .fusor import RustModule, conflicts_json, fuse_module, fusion_log_json
from .repairer import make_fallback_store, repair
from .rust_prober import (
    ContextCatalog,
    ProbeItem,
    ResolvedUnit,
    compile_check,
    generate_catalog,
    probe,
)
from .translator import (
    LazinessVerdict,
    TranslatedFunction,
    detect_laziness,
    make_backend,
    translate,
)

STAGES = ["split", "cprobe", "translate", "rustprobe", "repair", "fuse", "report"]


def _sha(data: bytes | str) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()


def _atomic_write(path: Path, text: str):
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


class PipelineState:
    """state.json wrapper; every save is an atomic replace."""

    def __init__(self, workdir: Path, config_hash: str):
        self.path = workdir / "state.json"
        if self.path.exists():
            self.data = json.loads(self.path.read_text(encoding="utf-8"))
            if self.data.get("config_hash") != config_hash:
                raise MigrateKitError(
                    "workdir state was produced by a different config; "
                    "use a fresh workdir or the original config"
                )
        else:
            self.data = {
                "config_hash": config_hash,
                "stages": {},
                "functions": {},
                "halted": {},
                "manual_edits": [],
            }

    def save(self):
        _atomic_write(self.path, json.dumps(self.data, indent=2, sort_keys=True) + "\n")

    def fn(self, fid: str) -> dict:
        return self.data["functions"].setdefault(fid, {"stage": None})

    def stage_done(self, name: str, input_hash: str):
        self.data["stages"][name] = {"done": True, "input_hash": input_hash}
        self.save()

    def stage_ok(self, name: str, input_hash: str) -> bool:
        st = self.data["stages"].get(name)
        return bool(st and st.get("done") and st.get("input_hash") == input_hash)

    def halt(self, fid: str, err: str):
        self.data["halted"][fid] = err
        self.save()

    @property
    def halted(self) -> dict:
        return self.data["halted"]


@dataclass
class Workspace:
    root: Path

    def __post_init__(self):
        self.root = Path(self.root)
        (self.root / "functions").mkdir(parents=True, exist_ok=True)
        (self.root / "scratch").mkdir(parents=True, exist_ok=True)

    def fpath(self, slug: str, suffix: str) -> Path:
        return self.root / "functions" / f"{slug}{suffix}"

    def scratch(self, slug: str) -> Path:
        d = self.root / "scratch" / slug
        d.mkdir(parents=True, exist_ok=True)
        return d


def fs_slug(fid: str, taken: dict[str, str]) -> str:
    """Readable, unique, filesystem-safe name for a function id."""
    file_part, name = fid.rsplit("::", 1)
    stem = Path(file_part).stem
    base = re.sub(r"[^A-Za-z0-9_.-]", "_", f"{stem}__{name}")
    slug = base
    if slug in taken and taken[slug] != fid:
        slug = f"{base}__{_sha(fid)[:8]}"
    taken[slug] = fid
    return slug


class Pipeline:
    def __init__(self, config: Config, workdir: str | Path, backend=None):
        self.config = config
        self.ws = Workspace(Path(workdir))
        self.state = PipelineState(self.ws.root, config.snapshot_hash())
        self.state.save()
        self._backend_override = backend
        self._module: ModuleIR | None = None
        self._graph: CallGraph | None = None
        self._slugs: dict[str, str] = {}
        self._slug_taken: dict[str, str] = {}

    def _backend(self):
        if self._backend_override is not None:
            return self._backend_override
        return make_backend(self.config.backend_kind, self.config.backend_params)

    # ---- shared loading -----------------------------------------------

    def module(self) -> ModuleIR:
        if self._module is None:
            self._module = parse_module(self.config.input_paths())
            for u in self._module.functions:
                self._slugs[u.id] = fs_slug(u.id, self._slug_taken)
        return self._module

    def graph(self) -> CallGraph:
        if self._graph is None:
            self._graph = build_call_graph(self.module())
        return self._graph

    def slug(self, fid: str) -> str:
        self.module()
        return self._slugs[fid]

    def _inputs_hash(self) -> str:
        h = hashlib.sha256()
        for f in self.module().files:
            h.update(f.path.encode())
            h.update(f.text.encode())
        return h.hexdigest()

    def _ordered_ids(self) -> list[str]:
        return [fid for group in leaves_first_schedule(self.graph()) for fid in group]

    def _active_ids(self) -> list[str]:
        return [fid for fid in self._ordered_ids() if fid not in self.state.halted]

    def _require_artifact(self, path: Path):
        if not path.exists():
            raise MissingPrerequisite(str(path.relative_to(self.ws.root)))

    # ---- stages ---------------------------------------------------------

    def stage_split(self):
        module = self.module()
        graph = self.graph()
        ih = self._inputs_hash()
        if self.state.stage_ok("split", ih) and (self.ws.root / "callgraph.json").exists():
            return
        _atomic_write(self.ws.root / "callgraph.json", callgraph_to_json(graph))
        for u in module.functions:
            _atomic_write(self.ws.fpath(self.slug(u.id), ".c"), u.body_text)
            st = self.state.fn(u.id)
            st["stage"] = "split"
            st["name"] = u.name
            st["c_lines"] = u.line_count
        self.state.stage_done("split", ih)

    def stage_cprobe(self):
        self._require_artifact(self.ws.root / "callgraph.json")
        module = self.module()
        index = CodebaseIndex.build(module)
        ih = self._inputs_hash()
        if self.state.stage_ok("cprobe", ih):
            return
        for u in module.functions:
            if u.id in self.state.halted:
                continue
            slug = self.slug(u.id)
            try:
                unit, unresolved, warnings, ambiguities = probe_context(
                    u, module, index, self.config.context_budget,
                    frozenset(self.config.builtins),
                )
            except MigrateKitError as e:
                self.state.halt(u.id, f"cprobe: {e}")
                continue
            _atomic_write(self.ws.fpath(slug, ".ctx.c"), render_ctx_c(unit))
            _atomic_write(
                self.ws.fpath(slug, ".unresolved.json"),
                unresolved_report_json(unresolved, ambiguities),
            )
            _atomic_write(self.ws.fpath(slug, ".unit.json"), _unit_to_json(unit))
            st = self.state.fn(u.id)
            st["stage"] = "cprobe"
            st["warnings"] = warnings
        self.state.stage_done("cprobe", ih)

    def _load_unit(self, fid: str) -> TranslationUnit:
        path = self.ws.fpath(self.slug(fid), ".unit.json")
        self._require_artifact(path)
        return _unit_from_json(path.read_text(encoding="utf-8"), self.module().unit(fid))

    def stage_translate(self):
        module = self.module()
        backend = self._backend()
        for u in module.functions:
            if u.id in self.state.halted:
                continue
            slug = self.slug(u.id)
            st = self.state.fn(u.id)
            core_path = self.ws.fpath(slug, ".core.rs")
            if st.get("stage") in ("translate", "rustprobe", "repair") and core_path.exists():
                continue
            unit = self._load_unit(u.id)
            sink = lambda n, code: _atomic_write(  # noqa: E731
                self.ws.fpath(slug, f".rs.attempt{n}"), code
            )
            try:
                tf = translate(
                    unit,
                    backend,
                    retry_cap=self.config.retry_cap,
                    project_rules=self.config.project_rules,
                    laziness=self.config.laziness,
                    attempt_sink=sink,
                )
            except MigrateKitError as e:
                self.state.halt(u.id, f"translate: {e}")
                continue
            _atomic_write(core_path, tf.rust_text)
            st["stage"] = "translate"
            st["translate_status"] = tf.status
            st["attempts"] = tf.attempts
            st["lazy"] = tf.laziness.lazy
            st["laziness_evidence"] = list(tf.laziness.evidence)
            if tf.status == "syntax-failed":
                self.state.halt(u.id, "translate: syntax-failed after retry cap")
            self.state.save()

    def _catalog(self) -> ContextCatalog:
        cat_path = self.ws.root / "catalog.json"
        if cat_path.exists():
            return ContextCatalog.load(cat_path)
        if self.config.catalog_path and Path(self.config.catalog_path).exists():
            catalog = ContextCatalog.load(self.config.catalog_path)
        else:
            catalog = generate_catalog(self.module())
        catalog.save(cat_path)
        return catalog

    def _translated(self, fid: str) -> TranslatedFunction | None:
        st = self.state.fn(fid)
        path = self.ws.fpath(self.slug(fid), ".core.rs")
        if not path.exists() or st.get("translate_status") not in ("syntax-ok", "lazy-flagged"):
            return None
        return TranslatedFunction(
            fid,
            path.read_text(encoding="utf-8"),
            st.get("attempts", 1),
            LazinessVerdict(bool(st.get("lazy")), tuple(st.get("laziness_evidence", [])) or ())
            if st.get("lazy")
            else LazinessVerdict(False, ()),
            st["translate_status"],
        )

    def stage_rustprobe(self):
        module = self.module()
        catalog = self._catalog()
        callees: dict[str, str] = {}
        lazy_names: set[str] = set()
        for u in module.functions:
            tf = self._translated(u.id)
            if tf is not None:
                callees[u.name] = tf.rust_text
                if tf.status == "lazy-flagged":
                    lazy_names.add(u.name)
        for fid in self._active_ids():
            slug = self.slug(fid)
            st = self.state.fn(fid)
            if st.get("stage") in ("rustprobe", "repair") and self.ws.fpath(
                slug, ".resolved.json"
            ).exists():
                continue
            tf = self._translated(fid)
            if tf is None:
                self._require_artifact(self.ws.fpath(slug, ".core.rs"))
                continue
            diag_log: list = []
            unit = probe(
                tf,
                catalog,
                callees,
                max_iters=self.config.probe_max_iters,
                scaffold=self.config.scaffold,
                scratch_dir=self.ws.scratch(slug),
                lazy_callee_names=frozenset(lazy_names),
                diag_log=diag_log,
            )
            _atomic_write(self.ws.fpath(slug, ".resolved.rs"), unit.rendered())
            _atomic_write(self.ws.fpath(slug, ".resolved.json"), _resolved_to_json(unit))
            _atomic_write(
                self.ws.fpath(slug, ".diag.jsonl"),
                "".join(json.dumps(batch, sort_keys=True) + "\n" for batch in diag_log),
            )
            st["stage"] = "rustprobe"
            st["probe_status"] = unit.status
            st["probe_iterations"] = unit.iterations_used
            st["lazy_callees"] = list(unit.lazy_callees)
            self.state.save()

    def _load_resolved(self, fid: str) -> ResolvedUnit:
        path = self.ws.fpath(self.slug(fid), ".resolved.json")
        self._require_artifact(path)
        return _resolved_from_json(path.read_text(encoding="utf-8"))

    def stage_repair(self):
        module = self.module()
        backend = self._backend()
        file_store = {}
        if self.config.fallback_store_path and Path(self.config.fallback_store_path).exists():
            file_store = json.loads(
                Path(self.config.fallback_store_path).read_text(encoding="utf-8")
            )
        store = make_fallback_store(module.functions, file_store)
        units = {u.id: u for u in module.functions}
        for fid in self._active_ids():
            slug = self.slug(fid)
            st = self.state.fn(fid)
            if st.get("stage") == "repair":
                continue
            unit = self._load_resolved(fid)
            if unit.status == "compiles":
                st["stage"] = "repair"
                st["final_status"] = "compiled-directly"
                self.state.save()
                continue
            log_path = self.ws.fpath(slug, ".repair.jsonl")
            sink_entries: list[str] = []
            try:
                outcome = repair(
                    unit,
                    backend,
                    cap=self.config.repair_cap,
                    scaffold=self.config.scaffold,
                    scratch_dir=self.ws.scratch(slug),
                    project_rules=self.config.project_rules,
                    fallback_store=store,
                    core_fn=units[fid],
                    attempt_sink=lambda r, code: sink_entries.append(
                        json.dumps({"round": r, "completion": code}, sort_keys=True)
                    ),
                )
            except MigrateKitError as e:
                self.state.halt(fid, f"repair: {e}")
                continue
            final_unit = outcome.final_unit
            if outcome.final_status == "fallback-applied" and final_unit.status != "compiles":
                # a fallback body may need symbols the failed translation never
                # pulled; give it the same compiler-driven resolution pass
                reprobed = self._probe_fallback(fid, final_unit)
                if reprobed is not None:
                    final_unit = reprobed
                    outcome = type(outcome)(
                        outcome.core_id, outcome.final_status, outcome.attempts, final_unit
                    )
            for att in outcome.attempts:
                sink_entries.append(
                    json.dumps(
                        {
                            "round": att.round,
                            "outcome": att.outcome,
                            "errors": [d.code or "" for d in att.input_diagnostics],
                        },
                        sort_keys=True,
                    )
                )
            _atomic_write(log_path, "".join(e + "\n" for e in sink_entries))
            _atomic_write(self.ws.fpath(slug, ".resolved.rs"), outcome.final_unit.rendered())
            _atomic_write(
                self.ws.fpath(slug, ".resolved.json"), _resolved_to_json(outcome.final_unit)
            )
            st["stage"] = "repair"
            st["final_status"] = outcome.final_status
            st["repair_rounds"] = len(outcome.attempts)
            self.state.save()

    def _probe_fallback(self, fid: str, unit: ResolvedUnit) -> ResolvedUnit | None:
        module = self.module()
        catalog = self._catalog()
        callees: dict[str, str] = {}
        for u in module.functions:
            tf = self._translated(u.id)
            if tf is not None and u.id != fid:
                callees[u.name] = tf.rust_text
        pseudo = TranslatedFunction(fid, unit.core_item.text, 1, LazinessVerdict(False, ()),
                                    "syntax-ok")
        reprobed = probe(
            pseudo,
            catalog,
            callees,
            max_iters=self.config.probe_max_iters,
            scaffold=self.config.scaffold,
            scratch_dir=self.ws.scratch(self.slug(fid)),
            core_provenance="fallback",
        )
        return reprobed if reprobed.status == "compiles" else None

    def stage_fuse(self):
        module = self.module()
        units: dict[str, ResolvedUnit] = {}
        for fid in self._ordered_ids():
            if fid in self.state.halted:
                continue
            units[fid] = self._load_resolved(fid)
        if not units:
            raise MissingPrerequisite("functions/*.resolved.json")
        schedule = [
            [fid for fid in group if fid in units]
            for group in leaves_first_schedule(self.graph())
        ]
        schedule = [g for g in schedule if g]
        fused = fuse_module(
            schedule,
            units,
            compile_each_step=self.config.compile_each_fuse_step,
            scaffold=self.config.scaffold,
            scratch_dir=self.ws.scratch("_fuse"),
        )
        _atomic_write(self.ws.root / "module.rs", fused.rendered())
        _atomic_write(self.ws.root / "fusion_log.json", fusion_log_json(fused))
        _atomic_write(self.ws.root / "conflicts.json", conflicts_json(fused))
        _atomic_write(
            self.ws.root / "module.items.json",
            json.dumps(
                [it.__dict__ for it in fused.items], indent=2, sort_keys=True
            ) + "\n",
        )
        self.state.data["module_status"] = fused.status
        self.state.data["module_hash"] = _sha(fused.rendered())
        self.state.stage_done("fuse", self._inputs_hash())

    def _load_module_items(self) -> list[ProbeItem]:
        path = self.ws.root / "module.items.json"
        self._require_artifact(path)
        return [ProbeItem(**d) for d in json.loads(path.read_text(encoding="utf-8"))]

    def stage_report(self) -> dict:
        module = self.module()
        self._require_artifact(self.ws.root / "module.rs")
        items = self._load_module_items()
        by_name = {it.name: it for it in items}
        manual_edits = self.state.data.get("manual_edits", [])
        mml_by_item: dict[str, int] = {}
        for edit in manual_edits:
            mml_by_item[edit["item"]] = mml_by_item.get(edit["item"], 0) + edit["mml"]
        per_fn: list[metrics.FunctionMetrics] = []
        references: dict[str, str] = {}
        if self.config.references_dir:
            for p in sorted(Path(self.config.references_dir).glob("*.rs")):
                references[p.stem] = p.read_text(encoding="utf-8")
        scores: list[float] = []
        for fid in self._ordered_ids():
            st = self.state.fn(fid)
            u = module.unit(fid)
            item = by_name.get(u.name)
            if fid in self.state.halted or item is None:
                per_fn.append(
                    metrics.FunctionMetrics(fid, 0, 0, 0, bool(st.get("lazy")), False,
                                            mml_by_item.get(u.name, 0), "halted")
                )
                continue
            try:
                safe, total = metrics.count_safe_lines(item.text)
            except ParseFailed:
                safe, total = 0, len(metrics.significant_lines(item.text))
            compiled = self._load_resolved(fid).status == "compiles"
            per_fn.append(
                metrics.FunctionMetrics(
                    fid,
                    len(metrics.significant_lines(item.text)),
                    safe,
                    total,
                    bool(st.get("lazy")),
                    bool(compiled),
                    mml_by_item.get(u.name, 0),
                    item.provenance,
                )
            )
            if u.name in references:
                try:
                    scores.append(codebleu(item.text, references[u.name]))
                except (ParseFailed, ValueError):
                    pass
        module_text = (self.ws.root / "module.rs").read_text(encoding="utf-8")
        llm_texts = [it.text for it in items if it.provenance == "translated"]
        manual_total = sum(e["mml"] for e in manual_edits)
        report = metrics.module_report(
            per_fn,
            module_text,
            llm_texts,
            manual_total,
            codebleu_score=(sum(scores) / len(scores)) if scores else None,
        )
        report["halted"] = dict(self.state.halted)
        report["module"]["fusion_status"] = self.state.data.get("module_status")
        recorded = self.state.data.get("module_hash")
        report["module"]["external_edit_detected"] = bool(
            recorded and recorded != _sha(module_text)
        )
        _atomic_write(self.ws.root / "report.json", metrics.report_json(report))
        _atomic_write(self.ws.root / "report.md", metrics.report_markdown(report))
        self.state.stage_done("report", self._inputs_hash())
        return report

    # ---- drivers --------------------------------------------------------

    def run(self) -> dict:
        self.stage_split()
        self.stage_cprobe()
        self.stage_translate()
        self.stage_rustprobe()
        self.stage_repair()
        self.stage_fuse()
        return self.stage_report()

    def run_stage(self, name: str):
        dispatch = {
            "split": self.stage_split,
            "cprobe": self.stage_cprobe,
            "translate": self.stage_translate,
            "rustprobe": self.stage_rustprobe,
            "repair": self.stage_repair,
            "fuse": self.stage_fuse,
            "report": self.stage_report,
        }
        if name not in dispatch:
            raise MigrateKitError(f"unknown stage {name}")
        return dispatch[name]()

    def exit_code(self) -> int:
        return 2 if self.state.halted else 0


# ---- interactive review ---------------------------------------------------


class ReviewSession:
    """Text-mode review of residual errors and conflicts after fusion.

    Accepted replacements must compile; they are recorded as manual edits so
    the report's MML accounting covers them. Quitting preserves all state.
    """

    def __init__(self, pipeline: Pipeline, input_fn=input, output_fn=print):
        self.p = pipeline
        self.read = input_fn
        self.write = output_fn

    def _items(self) -> list[ProbeItem]:
        return self.p._load_module_items()

    def _problems(self) -> list[str]:
        out: list[str] = []
        conflicts = json.loads(
            (self.p.ws.root / "conflicts.json").read_text(encoding="utf-8")
        )["conflicts"]
        for c in conflicts:
            out.append(f"conflict: `{c['name']}` kept from {c['kept_from']}, "
                       f"rejected from {c['rejected_from']}")
        items = self._items()
        diags = compile_check(
            [it.text for it in items], self.p.config.scaffold,
            self.p.ws.scratch("_review"),
        )
        for d in diags:
            out.append(f"error {d.code or ''}: {d.message}")
        for fid, st in self.p.state.data["functions"].items():
            if st.get("final_status") == "manual-required":
                out.append(f"manual-required: {fid}")
        return out

    def _accept_replacement(self, name: str, new_text: str) -> bool:
        items = self._items()
        idx = next((i for i, it in enumerate(items) if it.name == name), None)
        if idx is None:
            self.write(f"no item named `{name}` in the module")
            return False
        from .rust_syntax import parse_items as _pi

        _, issues = _pi(new_text)
        if issues:
            self.write(f"rejected: replacement does not parse: {issues[0].message} "
                       f"at {issues[0].line}:{issues[0].col}")
            return False
        old = items[idx]
        candidate = list(items)
        candidate[idx] = ProbeItem(name, new_text, "manual", old.kind)
        diags = compile_check(
            [it.text for it in candidate], self.p.config.scaffold,
            self.p.ws.scratch("_review"),
        )
        if diags:
            self.write("rejected: replacement does not compile:")
            for d in diags[:5]:
                self.write(f"  {d.code or ''} {d.message}")
            return False
        rendered = "\n\n".join(it.text.rstrip("\n") for it in candidate) + "\n"
        _atomic_write(self.p.ws.root / "module.rs", rendered)
        _atomic_write(
            self.p.ws.root / "module.items.json",
            json.dumps([it.__dict__ for it in candidate], indent=2, sort_keys=True) + "\n",
        )
        edit_mml = metrics.compute_mml(old.text, new_text)
        self.p.state.data["manual_edits"].append(
            {"item": name, "before": old.text, "after": new_text, "mml": edit_mml}
        )
        conflicts = json.loads(
            (self.p.ws.root / "conflicts.json").read_text(encoding="utf-8")
        )["conflicts"]
        conflicts = [c for c in conflicts if c["name"] != name]
        _atomic_write(
            self.p.ws.root / "conflicts.json",
            json.dumps({"conflicts": conflicts}, indent=2, sort_keys=True) + "\n",
        )
        self.p.state.data["module_hash"] = _sha(rendered)
        for fid, st in self.p.state.data["functions"].items():
            if st.get("final_status") == "manual-required" and fid.endswith(f"::{name}"):
                st["final_status"] = "manual-resolved"
                resolved = self.p._load_resolved(fid)
                fixed = ResolvedUnit(
                    resolved.core_id,
                    resolved.context_items + (ProbeItem(name, new_text, "manual"),),
                    (),
                    resolved.iterations_used,
                    "compiles",
                    resolved.lazy_callees,
                )
                _atomic_write(
                    self.p.ws.fpath(self.p.slug(fid), ".resolved.json"),
                    _resolved_to_json(fixed),
                )
        self.p.state.save()
        self.write(f"accepted: `{name}` replaced ({edit_mml} lines counted as manual)")
        return True

    def run(self):
        self.p._require_artifact(self.p.ws.root / "module.rs")
        problems = self._problems()
        if not problems:
            self.write("nothing to review: module compiles with no conflicts")
            return
        self.write(f"{len(problems)} problem(s) to review; commands: "
                   "list, show <item>, replace <item>, quit")
        for p in problems:
            self.write(f"  {p}")
        while True:
            try:
                line = self.read("review> ").strip()
            except EOFError:
                return
            if not line:
                continue
            cmd, _, arg = line.partition(" ")
            arg = arg.strip()
            if cmd == "quit":
                return
            if cmd == "list":
                problems = self._problems()
                if not problems:
                    self.write("nothing left to review")
                for p in problems:
                    self.write(f"  {p}")
                continue
            if cmd == "show":
                item = next((it for it in self._items() if it.name == arg), None)
                self.write(item.text if item else f"no item named `{arg}`")
                continue
            if cmd == "replace":
                self.write("enter replacement; finish with a single `.` line")
                lines: list[str] = []
                while True:
                    try:
                        ln = self.read("")
                    except EOFError:
                        break
                    if ln.strip() == ".":
                        break
                    lines.append(ln)
                self._accept_replacement(arg, "\n".join(lines) + "\n")
                continue
            self.write(f"unknown command `{cmd}`")


# ---- (de)serialization helpers ------------------------------------------


def _unit_to_json(unit: TranslationUnit) -> str:
    def decls(ds):
        return [
            {
                "name": d.symbol.name,
                "kind": d.symbol.kind,
                "origin": d.symbol.origin,
                "decl_text": d.decl_text,
                "source": list(d.source),
            }
            for d in ds
        ]

    return json.dumps(
        {
            "core_id": unit.core.id,
            "types_and_macros": decls(unit.types_and_macros),
            "external_variables": decls(unit.external_variables),
            "called_functions": decls(unit.called_functions),
            "context_line_count": unit.context_line_count,
        },
        indent=2,
        sort_keys=True,
    ) + "\n"


def _unit_from_json(text: str, core: FunctionUnit) -> TranslationUnit:
    data = json.loads(text)

    def decls(key):
        return tuple(
            Declaration(
                SymbolRef(d["name"], d["kind"], d["origin"]),
                d["decl_text"],
                (d["source"][0], d["source"][1]),
            )
            for d in data[key]
        )

    return TranslationUnit(
        core=core,
        types_and_macros=decls("types_and_macros"),
        external_variables=decls("external_variables"),
        called_functions=decls("called_functions"),
        context_line_count=data["context_line_count"],
    )


def _resolved_to_json(unit: ResolvedUnit) -> str:
    return json.dumps(
        {
            "core_id": unit.core_id,
            "items": [it.__dict__ for it in unit.items],
            "diagnostics": [d.to_json() for d in unit.diagnostics],
            "iterations_used": unit.iterations_used,
            "status": unit.status,
            "lazy_callees": list(unit.lazy_callees),
        },
        indent=2,
        sort_keys=True,
    ) + "\n"


def _resolved_from_json(text: str) -> ResolvedUnit:
    from .rust_prober import Diagnostic

    data = json.loads(text)
    return ResolvedUnit(
        core_id=data["core_id"],
        items=tuple(ProbeItem(**it) for it in data["items"]),
        diagnostics=tuple(
            Diagnostic(
                d["code"], d["message"], d["primary_symbol"],
                tuple(d["span"]) if d["span"] else None, d["rendered"], d["level"],
            )
            for d in data["diagnostics"]
        ),
        iterations_used=data["iterations_used"],
        status=data["status"],
        lazy_callees=tuple(data["lazy_callees"]),
    )


def _resolved_has_errors(unit: ResolvedUnit) -> bool:
    return unit.status != "compiles"
