"""Run configuration: a single TOML file, credentials via environment only."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .errors import MigrateKitError
from .translator import (
    DEFAULT_MIN_C_STATEMENTS,
    DEFAULT_PLACEHOLDER_PATTERNS,
    DEFAULT_RATIO_THRESHOLD,
    DEFAULT_RETRY_CAP,
    LazinessConfig,
)
from .context_prober import DEFAULT_CONTEXT_BUDGET
from .repairer import DEFAULT_REPAIR_CAP
from .rust_prober import DEFAULT_MAX_ITERS, DEFAULT_PRELUDE, ScaffoldConfig


class ConfigError(MigrateKitError):
    pass


@dataclass(frozen=True)
class Config:
    codebase_root: str | None
    module_files: tuple[str, ...]
    backend_kind: str
    backend_params: dict
    retry_cap: int = DEFAULT_RETRY_CAP
    repair_cap: int = DEFAULT_REPAIR_CAP
    probe_max_iters: int = DEFAULT_MAX_ITERS
    context_budget: int = DEFAULT_CONTEXT_BUDGET
    laziness: LazinessConfig = LazinessConfig()
    project_rules: tuple[str, ...] = ()
    builtins: tuple[str, ...] = ()
    catalog_path: str | None = None
    fallback_store_path: str | None = None
    references_dir: str | None = None
    scaffold: ScaffoldConfig = ScaffoldConfig()
    compile_each_fuse_step: bool = True
    source_text: str = ""

    def snapshot_hash(self) -> str:
        return hashlib.sha256(self.source_text.encode("utf-8")).hexdigest()

    def input_paths(self) -> list[str]:
        if self.module_files:
            return list(self.module_files)
        if self.codebase_root:
            return [self.codebase_root]
        raise ConfigError("config needs project.codebase_root or project.files")


def _require(cond: bool, msg: str):
    if not cond:
        raise ConfigError(msg)


def load_config(path: str | Path) -> Config:
    p = Path(path)
    text = p.read_text(encoding="utf-8")
    data = tomllib.loads(text)
    base = p.parent

    def respath(v: str | None) -> str | None:
        if v is None:
            return None
        q = Path(v)
        return str(q if q.is_absolute() else base / q)

    project = data.get("project", {})
    backend = data.get("backend", {})
    limits = data.get("limits", {})
    lazy = data.get("laziness", {})
    prompt = data.get("prompt", {})
    paths = data.get("paths", {})
    scaffold = data.get("scaffold", {})

    retry_cap = int(limits.get("retry_cap", DEFAULT_RETRY_CAP))
    repair_cap = int(limits.get("repair_cap", DEFAULT_REPAIR_CAP))
    probe_max_iters = int(limits.get("probe_max_iters", DEFAULT_MAX_ITERS))
    context_budget = int(limits.get("context_budget", DEFAULT_CONTEXT_BUDGET))
    _require(retry_cap >= 1, "limits.retry_cap must be >= 1")
    _require(repair_cap >= 1, "limits.repair_cap must be >= 1")
    _require(probe_max_iters >= 1, "limits.probe_max_iters must be >= 1")
    _require(context_budget >= 1, "limits.context_budget must be >= 1")
    ratio = float(lazy.get("ratio_threshold", DEFAULT_RATIO_THRESHOLD))
    _require(0.0 < ratio <= 1.0, "laziness.ratio_threshold must be in (0, 1]")

    backend_kind = backend.get("kind", "replay")
    backend_params = {k: v for k, v in backend.items() if k != "kind"}
    if "fixture_path" in backend_params:
        backend_params["fixture_path"] = respath(backend_params["fixture_path"])

    return Config(
        codebase_root=respath(project.get("codebase_root")),
        module_files=tuple(respath(f) for f in project.get("files", [])),
        backend_kind=backend_kind,
        backend_params=backend_params,
        retry_cap=retry_cap,
        repair_cap=repair_cap,
        probe_max_iters=probe_max_iters,
        context_budget=context_budget,
        laziness=LazinessConfig(
            placeholder_patterns=tuple(
                lazy.get("placeholder_patterns", DEFAULT_PLACEHOLDER_PATTERNS)
            ),
            ratio_threshold=ratio,
            min_c_statements=int(lazy.get("min_c_statements", DEFAULT_MIN_C_STATEMENTS)),
        ),
        project_rules=tuple(prompt.get("project_rules", [])),
        builtins=tuple(project.get("builtins", [])),
        catalog_path=respath(paths.get("catalog")),
        fallback_store_path=respath(paths.get("fallback_store")),
        references_dir=respath(paths.get("references")),
        scaffold=ScaffoldConfig(
            edition=str(scaffold.get("edition", "2021")),
            no_std=bool(scaffold.get("no_std", False)),
            prelude=tuple(scaffold.get("prelude", DEFAULT_PRELUDE)),
            rustc=str(scaffold.get("rustc", "rustc")),
        ),
        compile_each_fuse_step=bool(data.get("fuse", {}).get("compile_each_step", True)),
        source_text=text,
    )
