import hashlib
from pathlib import Path

import numpy as np
import pytest

from tablefit import model


def tree_hash(root) -> str:
    """SHA-256 over relative paths and file bytes, for reproducibility checks."""
    digest = hashlib.sha256()
    for path in sorted(Path(root).rglob("*")):
        if path.is_file():
            digest.update(str(path.relative_to(root)).encode())
            digest.update(path.read_bytes())
    return digest.hexdigest()


def small_genotype(**overrides) -> model.TableGenotype:
    kwargs = dict(
        max_rows=4,
        max_cols=4,
        origin_x=30,
        origin_y=40,
        row_heights=(50, 60, 0, 0),
        col_widths=(80, 90, 70, 0),
    )
    kwargs.update(overrides)
    return model.TableGenotype(**kwargs)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
