"""Corpus reading and the page-to-model-frame transform.

The dataset layout is consumed as files: a manifest.json listing samples with
relative scan/skeleton paths. Scans are stored at page resolution; skeletons
at model resolution. Both are mapped into the same square model frame here,
matching the geometry the skeletons were rendered with (white padding on the
right and bottom, then an area-average downscale).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch
from PIL import Image

MODEL_RESOLUTION = 256


def load_grayscale(path) -> np.ndarray:
    """PNG to float32 in [0, 1], 0 = black ink."""
    with Image.open(path) as im:
        if im.mode != "L":
            im = im.convert("L")
        return np.asarray(im, dtype=np.float32) / 255.0


def to_model_frame(img: np.ndarray, size: int = MODEL_RESOLUTION) -> np.ndarray:
    """White-pad to a square on the right/bottom, box-filter down to size.

    Identity for an image already at the target shape, so model-resolution
    skeletons pass through unchanged.
    """
    if img.shape == (size, size):
        return np.asarray(img, dtype=np.float32)
    side = max(img.shape)
    canvas = np.ones((side, side), dtype=np.float32)
    canvas[: img.shape[0], : img.shape[1]] = img
    resized = Image.fromarray(canvas, mode="F").resize((size, size), Image.BOX)
    return np.clip(np.asarray(resized, dtype=np.float32), 0.0, 1.0)


class PairDataset:
    """Scan/skeleton pairs from a corpus directory or manifest path."""

    def __init__(self, manifest, limit: int | None = None):
        path = Path(manifest)
        if path.is_dir():
            path = path / "manifest.json"
        if not path.is_file():
            raise FileNotFoundError(f"no manifest at {path}")
        doc = json.loads(path.read_text())
        root = path.parent
        items = [
            (root / s["scan"], root / s["skeleton"], s["id"]) for s in doc["samples"]
        ]
        if limit is not None:
            items = items[: int(limit)]
        if not items:
            raise ValueError(f"{path}: manifest lists no samples")
        self.items = items

    def __len__(self) -> int:
        return len(self.items)

    def sample_id(self, index: int) -> str:
        return self.items[index][2]

    def pair(self, index: int):
        """(scan, skeleton) tensors, each 1 x 256 x 256 in [0, 1]."""
        scan_path, skel_path, _ = self.items[index]
        x = to_model_frame(load_grayscale(scan_path))
        y = to_model_frame(load_grayscale(skel_path))
        return torch.from_numpy(x).unsqueeze(0), torch.from_numpy(y).unsqueeze(0)
