import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from credit_default.tabular import Dataset

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ROOT = Path(__file__).resolve().parent.parent


def uci_path():
    env = os.environ.get("CREDIT_DEFAULT_DATA")
    path = Path(env) if env else ROOT / "data" / "uci_credit_default.csv"
    return path if path.is_file() else None


@pytest.fixture(scope="session")
def uci_csv():
    path = uci_path()
    if path is None:
        pytest.skip("UCI table not found; run scripts/fetch_uci.py or set CREDIT_DEFAULT_DATA")
    return path


def make_dataset(X, y, columns=None):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    columns = columns or [f"x{j}" for j in range(X.shape[1])]
    return Dataset(X, columns, np.asarray(y), np.arange(len(X)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def write_uci_like(path, n=400, seed=0):
    """Small file in the UCI layout whose label depends on PAY_0 and LIMIT_BAL."""
    from credit_default.tabular import UCI_SCHEMA

    rng = np.random.default_rng(seed)
    pay0 = rng.integers(-1, 4, n)
    limit = rng.integers(1, 50, n) * 10000
    logit = 1.5 * pay0 - limit / 200000 - 0.5
    y = (rng.random(n) < 1 / (1 + np.exp(-logit))).astype(int)
    lines = [",".join(UCI_SCHEMA)]
    for i in range(n):
        row = [i + 1, limit[i], rng.integers(1, 3), rng.integers(1, 4), rng.integers(1, 3),
               rng.integers(21, 70), pay0[i], *rng.integers(-1, 3, 5),
               *rng.integers(0, 90000, 6), *rng.integers(0, 9000, 6), y[i]]
        lines.append(",".join(str(int(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return Path(path)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: (int(k.split(".")[0]), k)):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
