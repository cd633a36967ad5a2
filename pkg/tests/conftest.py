import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ela_explain.pipeline.cli import main  # noqa: E402


@pytest.fixture(scope="session")
def desk_runs(tmp_path_factory):
    """Two independent ``all --profile desk`` runs with the same seed."""
    dirs, times, codes = [], [], []
    for name in ("desk_a", "desk_b"):
        out = tmp_path_factory.mktemp(name)
        t0 = time.perf_counter()
        codes.append(main(["all", "--profile", "desk", "--seed", "0", "--output-dir", str(out)]))
        times.append(time.perf_counter() - t0)
        dirs.append(out)
    return {"dirs": dirs, "seconds": times, "codes": codes}


def tree_files(root: Path, skip=("manifests",)) -> dict[str, bytes]:
    out = {}
    for p in sorted(root.rglob("*")):
        rel = p.relative_to(root)
        if p.is_file() and rel.parts[0] not in skip:
            out[str(rel)] = p.read_bytes()
    return out
