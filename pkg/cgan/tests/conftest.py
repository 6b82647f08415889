"""Shared helpers: build miniature corpora in the on-disk layout the trainer
consumes, without depending on the package that normally generates them."""

import json

import numpy as np
import pytest
from PIL import Image


def save_png(path, pixels: np.ndarray) -> None:
    """Float [0,1] array to an 8-bit grayscale PNG."""
    arr = np.rint(np.clip(pixels, 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(path)


def _table_images(rng, size):
    """A random grid skeleton and a scan showing part of it plus text blobs."""
    skel = np.ones((size, size), dtype=np.float64)
    scan = np.ones((size, size), dtype=np.float64)
    rows = rng.integers(2, 5)
    cols = rng.integers(2, 5)
    y0, x0 = rng.integers(4, 16, size=2)
    height = rng.integers(size // 2, size - 20)
    width = rng.integers(size // 2, size - 20)
    ys = np.linspace(y0, y0 + height, rows + 1).astype(int)
    xs = np.linspace(x0, x0 + width, cols + 1).astype(int)
    for y in ys:
        skel[y, xs[0] : xs[-1] + 1] = 0.0
        if rng.random() < 0.6:
            scan[y, xs[0] : xs[-1] + 1] = 0.0
    for x in xs:
        skel[ys[0] : ys[-1] + 1, x] = 0.0
        if rng.random() < 0.6:
            scan[ys[0] : ys[-1] + 1, x] = 0.0
    for _ in range(rows * cols):
        cy = rng.integers(ys[0] + 2, ys[-1] - 2)
        cx = rng.integers(xs[0] + 2, xs[-1] - 2)
        scan[cy : cy + 2, cx : cx + rng.integers(3, 9)] = 0.2
    return scan, skel


def make_corpus(root, count: int, size: int = 256, seed: int = 0,
                scan_shape=None) -> None:
    """Write `count` scan/skeleton pairs plus a manifest under `root`.

    scan_shape optionally stores scans at a non-model resolution (page-like),
    exercising the resize-on-load path; skeletons stay at model resolution.
    """
    rng = np.random.default_rng(seed)
    config_dir = root / "mini"
    config_dir.mkdir(parents=True, exist_ok=True)
    samples = []
    for i in range(count):
        scan, skel = _table_images(rng, size)
        if scan_shape is not None:
            full = np.ones(scan_shape, dtype=np.float64)
            clip = full[: scan.shape[0], : scan.shape[1]]
            clip[:] = scan[: clip.shape[0], : clip.shape[1]]
            scan = full
        sample_id = f"mini-{i:05d}"
        save_png(config_dir / f"{sample_id}.scan.png", scan)
        save_png(config_dir / f"{sample_id}.skel.png", skel)
        samples.append(
            {
                "id": sample_id,
                "config": "mini",
                "scan": f"mini/{sample_id}.scan.png",
                "skeleton": f"mini/{sample_id}.skel.png",
                "genotype": f"mini/{sample_id}.genotype.json",
            }
        )
    manifest = {
        "configs": [{"name": "mini", "count": count, "parameters": {}}],
        "page": {"width": size, "height": size, "model_resolution": size},
        "samples": samples,
        "seed": seed,
        "style": {},
    }
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))


@pytest.fixture(scope="session")
def smoke_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    make_corpus(root, 10, seed=7)
    return root
