import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
sys.path.insert(0, str(ROOT / "tests" / "oracles"))

from migratekit.config import load_config  # noqa: E402
from migratekit.orchestrator import Pipeline  # noqa: E402


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def mini_run(tmp_path_factory) -> Pipeline:
    """One shared golden-run pipeline over the mini corpus."""
    workdir = tmp_path_factory.mktemp("mini-run")
    config = load_config(FIXTURES / "mini_c.toml")
    pipeline = Pipeline(config, workdir)
    pipeline.run()
    return pipeline


@pytest.fixture(scope="session")
def hard_run(tmp_path_factory) -> Pipeline:
    """Shared run of the repair/fallback corpus."""
    workdir = tmp_path_factory.mktemp("hard-run")
    config = load_config(FIXTURES / "hard_c.toml")
    pipeline = Pipeline(config, workdir)
    pipeline.run()
    return pipeline


def write_module(tmp_path: Path, files: dict[str, str]) -> list[Path]:
    out = []
    for name, text in files.items():
        p = tmp_path / name
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text, encoding="utf-8")
        out.append(p)
    return out
