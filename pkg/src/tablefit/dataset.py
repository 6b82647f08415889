"""Batch generation of (scan, skeleton, genotype) corpora.

Every sample gets an independent random stream spawned deterministically from
the manifest seed, so corpora are byte-reproducible and samples can be
generated in any order or in parallel. The directory layout written here,
together with manifest.json, is the file contract consumed by external
translation-model tooling.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .fileio import read_json, write_json
from .model import (
    PageSpec,
    TableConfig,
    config_from_json,
    config_to_json,
    sample_genotype,
    save_genotype,
)
from .raster import RenderStyle, render_scan, render_skeleton, save_png


@dataclass(frozen=True)
class SampleRecord:
    sample_id: str
    config_name: str
    scan: str  # paths relative to the dataset root
    skeleton: str
    genotype: str


@dataclass(frozen=True)
class DatasetManifest:
    seed: int
    page: PageSpec
    style: RenderStyle
    configs: tuple  # (name, count) pairs
    config_specs: dict  # name -> TableConfig
    samples: tuple  # SampleRecord list


def _sample_paths(config_name: str, sample_id: str):
    base = f"{config_name}/{sample_id}"
    return f"{base}.scan.png", f"{base}.skel.png", f"{base}.genotype.json"


def _write_sample(args) -> SampleRecord:
    out_dir, page, style, config, index, seed = args
    rng = np.random.default_rng(seed)
    genotype = sample_genotype(config, rng, page=page)
    scan = render_scan(genotype, config, style, rng, page=page)
    skeleton = render_skeleton(genotype, page, style)
    sample_id = f"{config.name}-{index:05d}"
    scan_rel, skel_rel, geno_rel = _sample_paths(config.name, sample_id)
    root = Path(out_dir)
    save_png(root / scan_rel, scan)
    save_png(root / skel_rel, skeleton)
    save_genotype(root / geno_rel, genotype)
    return SampleRecord(sample_id, config.name, scan_rel, skel_rel, geno_rel)


def generate_dataset(
    configs,
    out_dir,
    seed: int,
    *,
    page: PageSpec | None = None,
    style: RenderStyle | None = None,
    jobs: int = 1,
) -> DatasetManifest:
    """Write one corpus per (TableConfig, count) pair plus a manifest.

    Per-sample seeds are spawned from `seed` in listing order, so the output
    is identical for any `jobs` value.
    """
    page = page or PageSpec()
    style = style or RenderStyle()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    root_seq = np.random.SeedSequence(seed)
    children = iter(root_seq.spawn(sum(count for _, count in configs)))
    work = []
    for config, count in configs:
        for index in range(count):
            work.append((out_dir, page, style, config, index, next(children)))

    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_write_sample, work, chunksize=16))
    else:
        records = [_write_sample(item) for item in work]

    manifest = DatasetManifest(
        seed=seed,
        page=page,
        style=style,
        configs=tuple((config.name, count) for config, count in configs),
        config_specs={config.name: config for config, _ in configs},
        samples=tuple(records),
    )
    write_json(out_dir / "manifest.json", manifest_to_json(manifest))
    return manifest


def manifest_to_json(manifest: DatasetManifest) -> dict:
    return {
        "seed": manifest.seed,
        "page": asdict(manifest.page),
        "style": asdict(manifest.style),
        "configs": [
            {
                "name": name,
                "count": count,
                "parameters": config_to_json(manifest.config_specs[name]),
            }
            for name, count in manifest.configs
        ],
        "samples": [
            {
                "id": record.sample_id,
                "config": record.config_name,
                "scan": record.scan,
                "skeleton": record.skeleton,
                "genotype": record.genotype,
            }
            for record in manifest.samples
        ],
    }


def manifest_from_json(obj: dict) -> DatasetManifest:
    style_kwargs = dict(obj["style"])
    return DatasetManifest(
        seed=int(obj["seed"]),
        page=PageSpec(**obj["page"]),
        style=RenderStyle(**style_kwargs),
        configs=tuple((c["name"], int(c["count"])) for c in obj["configs"]),
        config_specs={
            c["name"]: config_from_json(c["name"], c["parameters"]) for c in obj["configs"]
        },
        samples=tuple(
            SampleRecord(s["id"], s["config"], s["scan"], s["skeleton"], s["genotype"])
            for s in obj["samples"]
        ),
    )


def load_manifest(dataset_dir) -> DatasetManifest:
    path = Path(dataset_dir) / "manifest.json"
    if not path.exists():
        raise FileNotFoundError(f"no manifest.json under {dataset_dir}")
    return manifest_from_json(read_json(path))
