"""Command-line entry point.

    migratekit run|split|cprobe|translate|rustprobe|repair|fuse|review|report
        --config <file> --workdir <dir>

Exit codes: 0 success, 2 partial (halted lanes), 1 fatal.
"""

from __future__ import annotations

import argparse
import sys

from .config import load_config
from .errors import MigrateKitError
from .orchestrator import Pipeline, ReviewSession

COMMANDS = [
    "run", "split", "cprobe", "translate", "rustprobe", "repair", "fuse",
    "review", "report",
]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="migratekit",
        description="Function-level C-to-Rust migration pipeline",
    )
    parser.add_argument("command", choices=COMMANDS, help="pipeline stage to run")
    parser.add_argument("--config", "-c", required=True, help="TOML config file")
    parser.add_argument("--workdir", "-w", required=True, help="workspace directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        pipeline = Pipeline(config, args.workdir)
        if args.command == "run":
            report = pipeline.run()
            m = report["module"]
            print(f"module status: {m['fusion_status']}; CSR {m['csr']}; "
                  f"%SC {m['sc_pct']}; laziness {m['laziness_pct']}%")
            if report["halted"]:
                for fid, err in sorted(report["halted"].items()):
                    print(f"halted lane {fid}: {err}", file=sys.stderr)
        elif args.command == "review":
            ReviewSession(pipeline).run()
        else:
            pipeline.run_stage(args.command)
        return pipeline.exit_code()
    except MigrateKitError as e:
        print(f"fatal: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
