"""
Pytest configuration for the end-to-end CLI tests.

These tests run `python -m qcslab` in a subprocess and inspect the files it
writes, so they exercise argument parsing, exit codes and the JSON body.
"""

import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

# Add the project root to the Python path so that imports work correctly
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))


def run_cli(*args: str, cwd: Path = project_root) -> subprocess.CompletedProcess:
    """Run the qcslab CLI with a clean, single-worker environment."""
    env = dict(os.environ, QCSLAB_WORKERS="1", QCSLAB_LOG_LEVEL="WARNING", PYTHONPATH=str(project_root))
    return subprocess.run([sys.executable, "-m", "qcslab", *args], cwd=cwd, env=env,
                          capture_output=True, text=True, timeout=600)


@pytest.fixture
def cli():
    return run_cli


@pytest.fixture
def small_config(tmp_path):
    """A desk-sized fig_modified config written to a temporary file."""
    def write(**overrides):
        data = {'experiment': 'fig_modified', 'n': 40, 'k': 2, 'm_list': [12, 16, 20],
                'r_list': [1], 'trials': 2}
        data.update(overrides)
        path = tmp_path / f"{data['experiment']}.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        return path
    return write
