import json
import subprocess
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda t: int(t.split()[1].rstrip(':'))):
            terminalreporter.write_line(line)


CONFIGS = {
    "euclid2": {"kind": "euclidean", "dim": 2},
    "euclid3": {"kind": "euclidean", "dim": 3},
    "mink2": {"kind": "pseudo_euclidean", "dim": 2},
    "mink3": {"kind": "pseudo_euclidean", "dim": 3},
    "sphere": {"kind": "sphere", "dim": 2, "R": 1.0},
    "punctured": {"kind": "punctured_plane", "dim": 2, "a": 1.0},
    "conformal": {"kind": "riemannian_expr", "dim": 2, "g": [["1 + 0.1*(x1^2 + x2^2)", "0"], ["1 + 0.1*(x1^2 + x2^2)"]]},
}


@pytest.fixture
def configs(tmp_path):
    paths = {}
    for name, doc in CONFIGS.items():
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(doc))
        paths[name] = p
    return paths


def run_cli(*args, env=None):
    return subprocess.run(
        [sys.executable, "-m", "sigma_geometry", *map(str, args)],
        capture_output=True, text=True, env=env,
    )


@pytest.fixture
def cli():
    return run_cli
