"""migratekit: function-level C-to-Rust migration pipeline."""

__version__ = "0.1.0"

from .c_frontend import build_call_graph, leaves_first_schedule, parse_module
from .codebleu import codebleu
from .context_prober import assemble_context, collect_unresolved, global_search
from .fusor import fuse_module, fuse_step
from .metrics import compute_csr, compute_mml, count_safe_lines, laziness_rate
from .repairer import apply_fallback, repair
from .rust_prober import compile_check, lookup_definition, probe
from .translator import check_syntax, detect_laziness, translate

__all__ = [
    "parse_module", "build_call_graph", "leaves_first_schedule",
    "collect_unresolved", "global_search", "assemble_context",
    "translate", "check_syntax", "detect_laziness",
    "compile_check", "probe", "lookup_definition",
    "repair", "apply_fallback",
    "fuse_step", "fuse_module",
    "compute_mml", "count_safe_lines", "compute_csr", "laziness_rate", "codebleu",
]
