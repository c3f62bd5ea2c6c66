import os
from pathlib import Path

import numpy as np
import pytest

from hcoh import Dataset

REPO_ROOT = Path(__file__).resolve().parent.parent

MNIST_STEMS = (
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
)


def mnist_dir():
    """Directory holding the four MNIST IDX files, or None.

    Looked up from $HCOH_MNIST_DIR, falling back to <repo>/data/mnist.
    Files may be gzipped.
    """
    directory = Path(os.environ.get("HCOH_MNIST_DIR", REPO_ROOT / "data" / "mnist"))
    for stem in MNIST_STEMS:
        if not ((directory / stem).exists() or (directory / f"{stem}.gz").exists()):
            return None
    return directory


def require_mnist():
    directory = mnist_dir()
    if directory is None:
        pytest.skip(
            "MNIST IDX files not found; place the four ubyte files (optionally "
            "gzipped) under data/mnist or point HCOH_MNIST_DIR at them")
    return directory


def blob_dataset(n_classes=4, dim=16, per_class=600, spread=5.0, noise=1.0,
                 seed=7, name="blobs"):
    """Well-separated Gaussian blobs, one per class."""
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((n_classes, dim)) * spread
    features = np.vstack(
        [c + noise * rng.standard_normal((per_class, dim)) for c in centers])
    labels = np.repeat(np.arange(n_classes), per_class)
    return Dataset(features, labels, name)


@pytest.fixture
def blobs():
    return blob_dataset()
