from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest


ROOT = Path(__file__).resolve().parents[1]
SRC = ROOT / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

from qcap.models import OptimizerConfig  # noqa: E402


@pytest.fixture
def fast_cfg() -> OptimizerConfig:
    return OptimizerConfig(restarts=2, max_iters=300, tol=1e-10, seed=0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)

