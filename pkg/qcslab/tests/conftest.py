import os
import sys
from pathlib import Path

import numpy as np
import pytest

# Add the repository root to sys.path so that `import qcslab` works from any directory
repo_root = Path(__file__).parent.parent.parent
if str(repo_root) not in sys.path:
    sys.path.insert(0, str(repo_root))

# Tests use the documented defaults regardless of the developer's .env
os.environ.setdefault('QCSLAB_WORKERS', '1')
os.environ.setdefault('QCSLAB_LOG_BASE', 'e')


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
