import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from t2ieval.linalg_stats import GaussianStats

GOLDEN = Path(__file__).parent / "golden"


def random_gaussian(rng, d, n=100):
    mean = rng.normal(size=d)
    a = rng.normal(size=(d, d))
    cov = a @ a.T / d + 0.1 * np.eye(d)
    return GaussianStats(n=n, mean=mean, cov=cov)


def run_cli(*argv, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "t2ieval", *map(str, argv)],
        capture_output=True, text=True, cwd=cwd,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)
