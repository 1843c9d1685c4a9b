import os
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

MNIST_NAMES = (
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
)


def find_mnist_dir() -> Path | None:
    candidates = []
    if os.environ.get("RNNLAB_DATA_DIR"):
        candidates.append(Path(os.environ["RNNLAB_DATA_DIR"]))
    candidates.append(Path.home() / "data" / "mnist")
    candidates.append(Path("data") / "mnist")
    for cand in candidates:
        if all((cand / name).exists() for name in MNIST_NAMES):
            return cand
    return None


@pytest.fixture(scope="session")
def mnist_dir() -> Path:
    found = find_mnist_dir()
    if found is None:
        pytest.skip(
            "MNIST IDX files not found; set RNNLAB_DATA_DIR to a directory "
            "holding the four official files"
        )
    return found


def pytest_collection_modifyitems(config, items):
    if os.environ.get("RNNLAB_RUN_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="desk-scale experiment; set RNNLAB_RUN_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
