"""Command-line entry point: generate | fit | eval.

Every command takes its knobs from flags, optionally backed by a JSON run
config file (unknown keys rejected, flags win). All randomness flows from the
--seed flags, so any command rerun with the same arguments reproduces its
output byte for byte.
"""

from __future__ import annotations

import argparse
import io
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
from PIL import Image

from .dataset import generate_dataset, load_manifest
from .evaluation import (
    aggregate,
    compare,
    format_summary,
    save_histograms_csv,
    save_report_csv,
    save_reports_json,
)
from .fileio import atomic_write_bytes, read_json, write_json
from .ga import GaParams, evolve
from .model import (
    PRESETS,
    InfeasibleConfigError,
    genotype_from_json,
    genotype_to_json,
    load_configs,
    load_genotype,
)
from .objectives import (
    OBJECTIVE_KINDS,
    ObjectiveSpec,
    candidate_phenotype,
    fitness_value,
    objective_value,
)
from .raster import ImageFormatError, RenderStyle
from .skeleton_source import (
    DegradationParams,
    StubDiscriminator,
    degraded_skeleton,
    load_external_skeleton,
    oracle_skeleton,
)
from .xyinit import (
    DEFAULT_MIN_GAP_PX,
    DEFAULT_PEAK_THRESHOLD_FRAC,
    InsufficientStructureError,
    initial_genotype,
    random_initial_population,
)

SOURCES = ("oracle", "degraded", "external")


class CliError(Exception):
    pass


def _load_run_config(path, known) -> dict:
    cfg = read_json(path)
    if not isinstance(cfg, dict):
        raise CliError(f"{path}: run config must be a JSON object")
    unknown = set(cfg) - set(known)
    if unknown:
        raise CliError(f"{path}: unknown config keys {sorted(unknown)}")
    return cfg


def _pick(flag_value, file_cfg: dict, key: str, default):
    if flag_value is not None:
        return flag_value
    if key in file_cfg and file_cfg[key] is not None:
        return file_cfg[key]
    return default


def _section(file_cfg: dict, key: str, allowed) -> dict:
    section = file_cfg.get(key) or {}
    if not isinstance(section, dict):
        raise CliError(f"config section {key!r} must be an object")
    unknown = set(section) - set(allowed)
    if unknown:
        raise CliError(f"config section {key!r}: unknown keys {sorted(unknown)}")
    return section


# --- generate ----------------------------------------------------------------

_GENERATE_KEYS = ("configs", "seed", "jobs", "style", "presets_file")
_STYLE_KEYS = ("line_width", "separator_visibility_prob", "glyph_height", "word_gap", "cell_padding")


def cmd_generate(args) -> int:
    file_cfg = _load_run_config(args.config_file, _GENERATE_KEYS) if args.config_file else {}

    catalog = dict(PRESETS)
    presets_file = _pick(args.presets, file_cfg, "presets_file", None)
    if presets_file:
        catalog.update(load_configs(presets_file))

    pairs = []
    if args.config:
        for item in args.config:
            name, _, count_str = item.partition(":")
            if count_str:
                count = int(count_str)
            elif args.count is not None:
                count = args.count
            else:
                raise CliError(f"no sample count for configuration {name!r}; "
                               "use --count or NAME:COUNT")
            pairs.append((name, count))
    elif "configs" in file_cfg:
        for entry in file_cfg["configs"]:
            pairs.append((entry["name"], int(entry["count"])))
    else:
        raise CliError("no table configurations given (use --config or a config file)")

    configs = []
    for name, count in pairs:
        if name not in catalog:
            known = ", ".join(sorted(catalog))
            raise CliError(f"unknown configuration {name!r} (known: {known})")
        if count < 0:
            raise CliError(f"negative sample count for {name!r}")
        configs.append((catalog[name], count))

    style_cfg = _section(file_cfg, "style", _STYLE_KEYS)
    style = RenderStyle(**style_cfg) if style_cfg else None
    seed = int(_pick(args.seed, file_cfg, "seed", 0))
    jobs = int(_pick(args.jobs, file_cfg, "jobs", 1))

    manifest = generate_dataset(configs, args.out, seed, style=style, jobs=jobs)
    print(f"wrote {len(manifest.samples)} samples to {args.out}")
    return 0


# --- fit ---------------------------------------------------------------------

_FIT_KEYS = (
    "source", "objective", "lam", "no_ga", "limit", "overlays", "seed",
    "skeletons", "degradation", "xy", "ga",
)
_DEGRADATION_KEYS = ("divider_jitter_px", "segment_dropout_prob", "blur_radius", "speckle_prob")
_XY_KEYS = ("peak_threshold_frac", "min_gap_px")
_GA_KEYS = (
    "population_size", "survival_rate", "per_entry_mutation_prob",
    "structural_mutation_prob_per_dim", "convergence_epsilon", "convergence_window",
    "max_epochs", "geometry_mutation_step",
)


def _save_overlay(path, target_image, candidate_image) -> None:
    """Target in black, candidate dividers in red over it."""
    t = target_image.pixels
    c = candidate_image.pixels
    rgb = np.stack([t, t * c, t * c], axis=-1)
    arr = np.rint(rgb * 255.0).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(arr, mode="RGB").save(buf, format="PNG")
    atomic_write_bytes(path, buf.getvalue())


def cmd_fit(args) -> int:
    file_cfg = _load_run_config(args.config_file, _FIT_KEYS) if args.config_file else {}

    source = _pick(args.source, file_cfg, "source", "oracle")
    if source not in SOURCES:
        raise CliError(f"unknown source {source!r} (known: {', '.join(SOURCES)})")
    objective = _pick(args.objective, file_cfg, "objective", "nonoverlap")
    if objective not in OBJECTIVE_KINDS:
        raise CliError(f"unknown objective {objective!r}")
    lam = float(_pick(args.lam, file_cfg, "lam", 100.0))
    no_ga = args.no_ga or bool(file_cfg.get("no_ga", False))
    limit = _pick(args.limit, file_cfg, "limit", None)
    overlays = args.overlays or bool(file_cfg.get("overlays", False))
    seed = int(_pick(args.seed, file_cfg, "seed", 0))
    skeletons = _pick(args.skeletons, file_cfg, "skeletons", None)
    if source == "external" and not skeletons:
        raise CliError("--skeletons is required with --source external")

    deg_cfg = _section(file_cfg, "degradation", _DEGRADATION_KEYS)
    degradation = DegradationParams(
        divider_jitter_px=int(_pick(args.jitter, deg_cfg, "divider_jitter_px", 3)),
        segment_dropout_prob=float(_pick(args.dropout, deg_cfg, "segment_dropout_prob", 0.1)),
        blur_radius=int(_pick(args.blur, deg_cfg, "blur_radius", 1)),
        speckle_prob=float(_pick(args.speckle, deg_cfg, "speckle_prob", 0.001)),
    )
    xy_cfg = _section(file_cfg, "xy", _XY_KEYS)
    peak_threshold = float(
        _pick(args.peak_threshold, xy_cfg, "peak_threshold_frac", DEFAULT_PEAK_THRESHOLD_FRAC)
    )
    min_gap = int(_pick(args.min_gap, xy_cfg, "min_gap_px", DEFAULT_MIN_GAP_PX))

    ga_cfg = _section(file_cfg, "ga", _GA_KEYS)
    ga_base = GaParams(
        population_size=int(_pick(args.population, ga_cfg, "population_size", 50)),
        survival_rate=float(_pick(args.survival, ga_cfg, "survival_rate", 0.7)),
        per_entry_mutation_prob=float(
            _pick(args.mutation_prob, ga_cfg, "per_entry_mutation_prob", 0.1)
        ),
        structural_mutation_prob_per_dim=float(
            _pick(args.structural_prob, ga_cfg, "structural_mutation_prob_per_dim", 0.1)
        ),
        convergence_epsilon=float(_pick(args.epsilon, ga_cfg, "convergence_epsilon", 0.01)),
        convergence_window=int(_pick(args.window, ga_cfg, "convergence_window", 3)),
        max_epochs=int(_pick(args.max_epochs, ga_cfg, "max_epochs", 200)),
        geometry_mutation_step=int(_pick(args.step, ga_cfg, "geometry_mutation_step", 10)),
    )

    manifest = load_manifest(args.dataset)
    page = manifest.page
    samples = list(manifest.samples)
    if limit is not None:
        samples = samples[: int(limit)]

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_json(out_dir / "resolved_config.json", {
        "dataset": str(args.dataset),
        "source": source,
        "objective": objective,
        "lam": lam,
        "no_ga": no_ga,
        "limit": limit,
        "overlays": overlays,
        "seed": seed,
        "skeletons": str(skeletons) if skeletons else None,
        "degradation": {
            "divider_jitter_px": degradation.divider_jitter_px,
            "segment_dropout_prob": degradation.segment_dropout_prob,
            "blur_radius": degradation.blur_radius,
            "speckle_prob": degradation.speckle_prob,
        },
        "xy": {"peak_threshold_frac": peak_threshold, "min_gap_px": min_gap},
        "ga": {key: getattr(ga_base, key) for key in _GA_KEYS},
    })

    needs_discriminator = objective in ("discriminator_logprob", "weighted")
    spec = ObjectiveSpec(
        kind=objective,
        lam=lam,
        discriminator=StubDiscriminator() if needs_discriminator else None,
    )

    children = np.random.SeedSequence(seed).spawn(len(samples))
    dataset_root = Path(args.dataset)
    failures = []
    fitted = 0
    for record, child in zip(samples, children):
        degrade_seed, ga_entropy, fallback_seed = child.spawn(3)
        try:
            truth = load_genotype(dataset_root / record.genotype)
            if source == "oracle":
                target = oracle_skeleton(truth, page)
            elif source == "degraded":
                target = degraded_skeleton(truth, degradation, degrade_seed, page)
            else:
                target = load_external_skeleton(
                    Path(skeletons) / f"{record.sample_id}.skel.png", page
                )

            init_mode = "projection"
            initial = None
            try:
                initial = initial_genotype(target, page, peak_threshold, min_gap)
                init_pop = [initial]
            except InsufficientStructureError:
                if no_ga:
                    raise
                init_mode = "random"
                config = manifest.config_specs[record.config_name]
                init_pop = random_initial_population(
                    config, ga_base.population_size, fallback_seed, page=page
                )

            initial_objective = None
            if initial is not None:
                initial_objective = objective_value(
                    spec, target, candidate_phenotype(initial, page)
                )

            if no_ga:
                best = initial
                best_objective = initial_objective
                record_out = {
                    "epochs": 0,
                    "converged": False,
                    "trace": [fitness_value(spec, best_objective)],
                }
            else:
                ga_params = replace(ga_base, seed=int(ga_entropy.generate_state(1)[0]))
                result = evolve(target, spec, init_pop, ga_params, page=page)
                best = result.best_genotype
                best_objective = result.best_objective
                record_out = {
                    "epochs": result.epochs_run,
                    "converged": result.converged,
                    "trace": list(result.per_epoch_best),
                }

            payload = {
                "id": record.sample_id,
                "config": record.config_name,
                "source": source,
                "init_mode": init_mode,
                "initial": genotype_to_json(initial) if initial is not None else None,
                "initial_objective": initial_objective,
                "genotype": genotype_to_json(best),
                "objective": best_objective,
                "fitness": fitness_value(spec, best_objective),
                **record_out,
            }
            write_json(out_dir / f"{record.sample_id}.fit.json", payload)
            if overlays:
                _save_overlay(
                    out_dir / f"{record.sample_id}.overlay.png",
                    target.image,
                    candidate_phenotype(best, page),
                )
            fitted += 1
        except (InsufficientStructureError, ImageFormatError, FileNotFoundError) as exc:
            failures.append({"id": record.sample_id, "error": str(exc)})

    write_json(out_dir / "errors.json", {"failures": failures})
    print(f"fitted {fitted} samples, {len(failures)} failures")
    return 1 if failures else 0


# --- eval --------------------------------------------------------------------

def cmd_eval(args) -> int:
    manifest = load_manifest(args.dataset)
    dataset_root = Path(args.dataset)
    by_id = {record.sample_id: record for record in manifest.samples}

    fits_dir = Path(args.fits)
    fit_files = sorted(fits_dir.glob("*.fit.json"))
    if not fit_files:
        raise CliError(f"no *.fit.json files under {fits_dir}")

    grouped: dict = {}
    unmatched = []
    n_loaded = 0
    for path in fit_files:
        payload = read_json(path)
        sample_id = payload["id"]
        record = by_id.get(sample_id)
        if record is None:
            unmatched.append(sample_id)
            continue
        truth = load_genotype(dataset_root / record.genotype)
        pred = genotype_from_json(payload["genotype"])
        grouped.setdefault(record.config_name, []).append(compare(truth, pred))
        n_loaded += 1

    if unmatched:
        print(
            f"warning: {len(unmatched)} fit results without ground truth, excluded: "
            + ", ".join(unmatched),
            file=sys.stderr,
        )
    if not grouped:
        raise CliError("no fit results matched the dataset")

    config_order = [name for name, _ in manifest.configs if name in grouped]
    reports = {name: aggregate(grouped[name]) for name in config_order}
    if len(reports) > 1:
        merged = [e for name in config_order for e in grouped[name]]
        reports["all"] = aggregate(merged)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_reports_json(out_dir / "report.json", reports)
    save_report_csv(out_dir / "report.csv", reports)
    save_histograms_csv(out_dir / "histograms.csv", reports)
    print(format_summary(reports))
    return 0


# --- argument parsing --------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tablefit",
        description="Synthetic table corpora, projection-based structure estimates, "
        "and genetic refinement against skeleton images.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a scan/skeleton/genotype corpus")
    gen.add_argument("--out", required=True, help="dataset directory")
    gen.add_argument(
        "--config",
        action="append",
        metavar="NAME[:COUNT]",
        help="table configuration preset; repeatable",
    )
    gen.add_argument("--count", type=int, help="sample count per configuration")
    gen.add_argument("--seed", type=int, help="manifest seed (default 0)")
    gen.add_argument("--presets", help="JSON file with extra configurations")
    gen.add_argument("--config-file", help="JSON run config")
    gen.add_argument("--jobs", type=int, help="parallel workers (default 1)")

    fit = sub.add_parser("fit", help="estimate genotypes for dataset samples")
    fit.add_argument("--dataset", required=True, help="directory with manifest.json")
    fit.add_argument("--out", required=True, help="run directory for fit results")
    fit.add_argument("--source", choices=SOURCES, help="target skeleton source (default oracle)")
    fit.add_argument("--skeletons", help="directory of external skeleton PNGs")
    fit.add_argument("--objective", choices=OBJECTIVE_KINDS, help="default nonoverlap")
    fit.add_argument("--lam", type=float, help="pixel-term weight for the weighted objective")
    fit.add_argument("--no-ga", action="store_true", help="stop after the initial estimate")
    fit.add_argument("--limit", type=int, help="fit only the first N samples")
    fit.add_argument("--overlays", action="store_true", help="write target/candidate overlays")
    fit.add_argument("--seed", type=int, help="run seed (default 0)")
    fit.add_argument("--jitter", type=int, help="degradation: divider jitter, page px")
    fit.add_argument("--dropout", type=float, help="degradation: segment dropout probability")
    fit.add_argument("--blur", type=int, help="degradation: box blur radius, page px")
    fit.add_argument("--speckle", type=float, help="degradation: pixel flip probability")
    fit.add_argument("--peak-threshold", type=float, help="projection peak threshold fraction")
    fit.add_argument("--min-gap", type=int, help="minimum peak separation, model px")
    fit.add_argument("--population", type=int, help="GA population size")
    fit.add_argument("--survival", type=float, help="GA survivor fraction")
    fit.add_argument("--mutation-prob", type=float, help="GA per-entry mutation probability")
    fit.add_argument("--structural-prob", type=float, help="GA structural mutation probability")
    fit.add_argument("--epsilon", type=float, help="GA convergence epsilon")
    fit.add_argument("--window", type=int, help="GA convergence window, epochs")
    fit.add_argument("--max-epochs", type=int, help="GA epoch cap")
    fit.add_argument("--step", type=int, help="GA geometry mutation step, page px")
    fit.add_argument("--config-file", help="JSON run config")

    ev = sub.add_parser("eval", help="score fit results against ground truth")
    ev.add_argument("--fits", required=True, help="directory of *.fit.json files")
    ev.add_argument("--dataset", required=True, help="dataset directory with ground truth")
    ev.add_argument("--out", required=True, help="directory for reports")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"generate": cmd_generate, "fit": cmd_fit, "eval": cmd_eval}
    try:
        return handlers[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InfeasibleConfigError, ImageFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
