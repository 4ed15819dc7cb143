"""Leaves-first fusion of resolved units into one Rust module."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConflictingDefinition
from .rust_prober import ProbeItem, ResolvedUnit, ScaffoldConfig, compile_check


@dataclass
class RustModule:
    items: list[ProbeItem]
    provenance: dict[str, str]
    fusion_log: list[dict]
    conflicts: list[dict]
    status: str  # compiles | has-errors | has-conflicts

    def rendered(self) -> str:
        return "\n\n".join(it.text.rstrip("\n") for it in self.items) + "\n"

    def item(self, name: str) -> ProbeItem | None:
        for it in self.items:
            if it.name == name:
                return it
        return None


def _normalized(text: str) -> str:
    return " ".join(text.split())


def _merge_one(
    acc_items: list[ProbeItem],
    incoming: ProbeItem,
    left_id: str,
    right_id: str,
) -> list[ProbeItem]:
    for i, existing in enumerate(acc_items):
        if existing.name != incoming.name:
            continue
        if _normalized(existing.text) == _normalized(incoming.text):
            return acc_items
        both_translated = existing.provenance == "translated" and incoming.provenance == "translated"
        if both_translated:
            raise ConflictingDefinition(incoming.name, left_id, right_id)
        # translated-vs-catalog: catalog wins for context items, translated for fns
        if incoming.kind == "fn" and existing.kind == "fn":
            keep = existing if existing.provenance in ("translated", "fallback", "manual") else incoming
        else:
            keep = existing if existing.provenance == "catalog" else (
                incoming if incoming.provenance == "catalog" else existing
            )
        acc_items[i] = keep
        return acc_items
    acc_items.append(incoming)
    return acc_items


def fuse_step(parent: ResolvedUnit, child: ResolvedUnit) -> ResolvedUnit:
    """Merge a child (already fused accumulator or leaf) into its parent:
    context items first in stable first-seen order, then functions
    leaves-first, duplicates removed."""
    context: list[ProbeItem] = []
    functions: list[ProbeItem] = []
    for it in child.items:
        bucket = functions if it.kind == "fn" else context
        _merge_one(bucket, it, child.core_id, child.core_id)
    for it in parent.items:
        bucket = functions if it.kind == "fn" else context
        _merge_one(bucket, it, child.core_id, parent.core_id)
    merged = tuple(context) + tuple(functions)
    return ResolvedUnit(
        core_id=parent.core_id,
        items=merged,
        diagnostics=(),
        iterations_used=parent.iterations_used,
        status="compiles" if parent.status == "compiles" and child.status == "compiles" else parent.status,
        lazy_callees=tuple(dict.fromkeys(child.lazy_callees + parent.lazy_callees)),
    )


def fuse_module(
    schedule: list[list[str]],
    units: dict[str, ResolvedUnit],
    compile_each_step: bool = True,
    scaffold: ScaffoldConfig = ScaffoldConfig(),
    scratch_dir: str | Path | None = None,
) -> RustModule:
    """Fold fuse_step over the leaves-first schedule, compile-checking each
    merge; conflicts are surfaced for review, never silently resolved."""
    order = [uid for group in schedule for uid in group]
    missing = [uid for uid in order if uid not in units]
    if missing:
        raise KeyError(f"schedule references units without artifacts: {missing}")
    log: list[dict] = []
    conflicts: list[dict] = []
    acc: ResolvedUnit | None = None
    for uid in order:
        unit = units[uid]
        if acc is None:
            acc = unit
        else:
            try:
                acc = fuse_step(parent=unit, child=acc)
            except ConflictingDefinition as e:
                conflicts.append(
                    {"name": e.name, "kept_from": e.left_id, "rejected_from": e.right_id}
                )
                # keep the accumulator's copy; the conflict goes to review
                pruned_items = tuple(
                    it for it in unit.items
                    if not (it.name == e.name and it.name != unit.core_item.name)
                )
                pruned = ResolvedUnit(
                    unit.core_id, pruned_items, unit.diagnostics,
                    unit.iterations_used, unit.status, unit.lazy_callees,
                )
                try:
                    acc = fuse_step(parent=pruned, child=acc)
                except ConflictingDefinition:
                    # the parent's own core conflicts; leave it out entirely
                    log.append(
                        {"step": len(log) + 1, "merged": uid,
                         "unit_status": "conflict-skipped", "compiles": False,
                         "errors": ["conflict"]}
                    )
                    continue
        entry = {"step": len(log) + 1, "merged": uid, "unit_status": unit.status}
        if compile_each_step:
            diags = compile_check([it.text for it in acc.items], scaffold, scratch_dir)
            entry["compiles"] = not diags
            entry["errors"] = [d.code or "" for d in diags]
        log.append(entry)
    assert acc is not None
    final_diags = compile_check([it.text for it in acc.items], scaffold, scratch_dir)
    status = "has-conflicts" if conflicts else ("compiles" if not final_diags else "has-errors")
    provenance = {it.name: it.provenance for it in acc.items}
    return RustModule(
        items=list(acc.items),
        provenance=provenance,
        fusion_log=log,
        conflicts=conflicts,
        status=status,
    )


def fusion_log_json(module: RustModule) -> str:
    return json.dumps(
        {"status": module.status, "steps": module.fusion_log},
        indent=2,
        sort_keys=True,
    ) + "\n"


def conflicts_json(module: RustModule) -> str:
    return json.dumps({"conflicts": module.conflicts}, indent=2, sort_keys=True) + "\n"
