"""End-to-end acceptance checks for the fitting pipeline.

Each test prints one [PASS]/[FAIL] line with its headline numbers, so a plain
pytest -s run doubles as the acceptance report.
"""

import time

import numpy as np
import pytest

from conftest import tree_hash
from tablefit import cli
from tablefit.evaluation import compare
from tablefit.fileio import read_json, write_json
from tablefit.ga import GaParams, evolve, mutate
from tablefit.model import (
    TableGenotype,
    divider_positions,
    get_preset,
    sample_genotype,
)
from tablefit.objectives import (
    ObjectiveSpec,
    candidate_phenotype,
    obj_discriminator,
    obj_l1,
    obj_nonoverlap,
    objective_value,
)
from tablefit.raster import RasterImage
from tablefit.skeleton_source import (
    DegradationParams,
    StubDiscriminator,
    degraded_skeleton,
    oracle_skeleton,
)
from tablefit.xyinit import (
    InsufficientStructureError,
    initial_genotype,
    random_initial_population,
)


def _report(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_criterion_1_projection_init_on_clean_skeletons():
    config = get_preset("base")
    t0 = time.time()
    rows_ok = cols_ok = 0
    x_errs, y_errs = [], []
    n = 1000
    for seed in range(n):
        truth = sample_genotype(config, seed)
        estimate = initial_genotype(oracle_skeleton(truth))
        err = compare(truth, estimate)
        rows_ok += err.row_count_error == 0
        cols_ok += err.col_count_error == 0
        x_errs.append(err.x0_abs_error)
        y_errs.append(err.y0_abs_error)
    dt = time.time() - t0
    mean_x, mean_y = float(np.mean(x_errs)), float(np.mean(y_errs))
    ok = (
        rows_ok >= 0.99 * n
        and cols_ok >= 0.99 * n
        and mean_x <= 3.0
        and mean_y <= 3.0
        and dt < 120.0
    )
    _report(
        "criterion 1",
        ok,
        f"clean-skeleton init on {n} samples: rows {100 * rows_ok / n:.1f}% "
        f"cols {100 * cols_ok / n:.1f}% mean|x0 err| {mean_x:.2f} px "
        f"mean|y0 err| {mean_y:.2f} px in {dt:.0f}s",
    )


@pytest.fixture(scope="module")
def degraded_fit_runs():
    """500 degraded targets fitted end to end; shared by criteria 2 and 3."""
    config = get_preset("base")
    params = DegradationParams(3, 0.1, 1, 0.0)
    spec = ObjectiveSpec()
    defaults = GaParams()
    stats = {
        "n": 500,
        "rows_ok": 0,
        "cols_ok": 0,
        "improved": 0,
        "epochs": [],
        "div_errs": [],
        "seconds": 0.0,
    }
    t0 = time.time()
    for child in np.random.SeedSequence(0).spawn(stats["n"]):
        deg_seed, ga_seed, samp_seed = child.spawn(3)
        truth = sample_genotype(config, np.random.default_rng(samp_seed))
        target = degraded_skeleton(truth, params, deg_seed)
        try:
            init = [initial_genotype(target, peak_threshold_frac=0.2)]
        except InsufficientStructureError:
            init = random_initial_population(
                config, defaults.population_size, samp_seed.spawn(1)[0]
            )
        initial_obj = min(obj_nonoverlap(target, candidate_phenotype(g)) for g in init)
        result = evolve(
            target, spec, init, GaParams(seed=int(ga_seed.generate_state(1)[0]))
        )
        err = compare(truth, result.best_genotype)
        stats["rows_ok"] += err.row_count_error == 0
        stats["cols_ok"] += err.col_count_error == 0
        stats["improved"] += result.best_objective <= initial_obj
        stats["epochs"].append(result.epochs_run)
        if err.row_count_error == 0 and err.col_count_error == 0:
            tx, ty = divider_positions(truth)
            px, py = divider_positions(result.best_genotype)
            diffs = np.concatenate([np.subtract(tx, px), np.subtract(ty, py)])
            stats["div_errs"].append(float(np.abs(diffs).mean()))
    stats["seconds"] = time.time() - t0
    return stats


def test_criterion_2_degraded_fit_accuracy(degraded_fit_runs):
    s = degraded_fit_runs
    n = s["n"]
    div_err = float(np.mean(s["div_errs"]))
    ok = s["rows_ok"] >= 0.95 * n and s["cols_ok"] >= 0.95 * n and div_err <= 5.0
    _report(
        "criterion 2",
        ok,
        f"degraded init+GA on {n} samples: rows {100 * s['rows_ok'] / n:.1f}% "
        f"cols {100 * s['cols_ok'] / n:.1f}% mean divider err {div_err:.2f} px "
        f"in {s['seconds']:.0f}s",
    )


def test_criterion_3_monotone_refinement(degraded_fit_runs):
    s = degraded_fit_runs
    med_epochs = float(np.median(s["epochs"]))
    ok = s["improved"] == s["n"] and med_epochs <= 10.0
    _report(
        "criterion 3",
        ok,
        f"final objective <= initial in {s['improved']}/{s['n']} runs, "
        f"median epochs {med_epochs:.0f}",
    )


def test_criterion_4_objective_sanity():
    rng = np.random.default_rng(99)
    checks = []

    # overlap distance is 0 exactly for identical non-blank images, 1 for blank
    reflexive_ok = True
    offsets = np.arange(16)
    for code in range(1 << 16):
        px = ((code >> offsets) & 1).reshape(4, 4).astype(np.float64)
        img = RasterImage(px)
        val = obj_nonoverlap(img, img)
        want = 1.0 if px.min() == 1.0 else 0.0
        if val != want:
            reflexive_ok = False
            break
    checks.append(("identity", reflexive_ok))

    distinct_ok = True
    for _ in range(2000):
        a = rng.integers(0, 2, (4, 4)).astype(np.float64)
        b = rng.integers(0, 2, (4, 4)).astype(np.float64)
        if np.array_equal(a, b) or a.min() == 1.0 or b.min() == 1.0:
            continue
        if not obj_nonoverlap(RasterImage(a), RasterImage(b)) > 0.0:
            distinct_ok = False
            break
    flips_ok = True
    for _ in range(500):
        bits = rng.integers(0, 2, (4, 4)).astype(np.float64)
        for k in range(16):
            other = bits.copy()
            other[k // 4, k % 4] = 1.0 - other[k // 4, k % 4]
            val = obj_nonoverlap(RasterImage(bits), RasterImage(other))
            blank = bits.min() == 1.0 or other.min() == 1.0
            if (blank and val != 1.0) or (not blank and not val > 0.0):
                flips_ok = False
                break
        if not flips_ok:
            break
    checks.append(("distinctness", distinct_ok and flips_ok))

    metric_ok = True
    for _ in range(1000):
        a, b, c = (RasterImage(rng.random((8, 8))) for _ in range(3))
        dab = obj_l1(a, b)
        if not (
            dab >= 0.0
            and np.isclose(dab, obj_l1(b, a), atol=1e-12)
            and dab <= obj_l1(a, c) + obj_l1(c, b) + 1e-9
            and obj_l1(a, a) == 0.0
        ):
            metric_ok = False
            break
    checks.append(("pixel-distance axioms", metric_ok))

    disc = StubDiscriminator()
    target = oracle_skeleton(sample_genotype(get_preset("base"), 0))
    cands = [candidate_phenotype(sample_genotype(get_preset("base"), s)) for s in range(1, 21)]
    plain = ObjectiveSpec("discriminator_logprob", discriminator=disc)
    lam0 = ObjectiveSpec("weighted", lam=0.0, discriminator=disc)
    huge = ObjectiveSpec("weighted", lam=1e9, discriminator=disc)
    d_vals = np.array([objective_value(plain, target, c) for c in cands])
    w0_vals = np.array([objective_value(lam0, target, c) for c in cands])
    wh_vals = np.array([objective_value(huge, target, c) for c in cands])
    l1_vals = np.array([obj_l1(target, c) for c in cands])
    degeneration_ok = bool(
        np.array_equal(w0_vals, d_vals)
        and np.argsort(-wh_vals).tolist() == np.argsort(l1_vals).tolist()
    )
    checks.append(("weighted-objective degeneration", degeneration_ok))

    perfect = obj_discriminator(plain, target.image, candidate_phenotype(sample_genotype(get_preset("base"), 0)))
    checks.append(("discriminator optimum", perfect == 0.0))

    ok = all(flag for _, flag in checks)
    detail = ", ".join(f"{name} {'ok' if flag else 'FAILED'}" for name, flag in checks)
    _report("criterion 4", ok, detail)


def test_criterion_5_mutation_rates():
    # geometry chosen so every structural op is feasible and every geometric
    # delta survives the page-fit check: observed rates equal the configured ones
    base = TableGenotype(4, 4, 200, 200, (50, 50, 50, 50), (80, 80, 80, 80))
    params = GaParams()
    rng = np.random.default_rng(12345)
    n = 10000
    x0_hits = y0_hits = h0_hits = rows_hits = cols_hits = rows_kept = 0
    for _ in range(n):
        m = mutate(base, params, rng)
        x0_hits += m.origin_x != 200
        y0_hits += m.origin_y != 200
        rows_hits += len(m.row_heights) != 4
        cols_hits += len(m.col_widths) != 4
        if len(m.row_heights) == 4:
            rows_kept += 1
            h0_hits += m.row_heights[0] != 50
    rates = {
        "x0": x0_hits / n,
        "y0": y0_hits / n,
        "row size": h0_hits / rows_kept,
        "rows structural": rows_hits / n,
        "cols structural": cols_hits / n,
    }
    ok = all(abs(rate - 0.10) <= 0.01 for rate in rates.values())
    detail = ", ".join(f"{name} {rate:.3f}" for name, rate in rates.items())
    _report("criterion 5", ok, f"observed mutation rates over {n} draws: {detail}")


def test_criterion_6_byte_reproducible_cli(tmp_path):
    def generate(out):
        assert (
            cli.main(
                [
                    "generate", "--out", str(out),
                    "--config", "base:2", "--config", "short_cells:2",
                    "--seed", "7",
                ]
            )
            == 0
        )

    gen_a, gen_b = tmp_path / "gen_a", tmp_path / "gen_b"
    generate(gen_a)
    generate(gen_b)
    gen_ok = tree_hash(gen_a) == tree_hash(gen_b)

    def fit(out):
        assert (
            cli.main(
                [
                    "fit", "--dataset", str(gen_a), "--out", str(out),
                    "--source", "degraded", "--seed", "11",
                    "--population", "12", "--max-epochs", "8",
                ]
            )
            == 0
        )

    fit_a, fit_b = tmp_path / "fit_a", tmp_path / "fit_b"
    fit(fit_a)
    fit(fit_b)
    fit_ok = tree_hash(fit_a) == tree_hash(fit_b)

    def evaluate(out):
        assert (
            cli.main(
                ["eval", "--fits", str(fit_a), "--dataset", str(gen_a), "--out", str(out)]
            )
            == 0
        )

    eval_a, eval_b = tmp_path / "eval_a", tmp_path / "eval_b"
    evaluate(eval_a)
    evaluate(eval_b)
    eval_ok = tree_hash(eval_a) == tree_hash(eval_b)

    ok = gen_ok and fit_ok and eval_ok
    _report(
        "criterion 6",
        ok,
        f"repeated runs byte-identical: generate {gen_ok}, fit {fit_ok}, eval {eval_ok}",
    )


def test_criterion_7_summary_table_per_configuration(tmp_path):
    suite = ("base", "smaller_font", "larger_font_2", "short_cells")
    # short_cells carries the pass threshold, so it gets a sample large enough
    # that a couple of hard tables cannot swing the percentage across the bar.
    counts = {"short_cells": 200}
    run_cfg = tmp_path / "suite.json"
    write_json(
        run_cfg,
        {
            "configs": [{"name": name, "count": counts.get(name, 40)} for name in suite],
            "seed": 2024,
        },
    )
    data = tmp_path / "data"
    assert cli.main(["generate", "--out", str(data), "--config-file", str(run_cfg)]) == 0
    fits = tmp_path / "fits"
    assert cli.main(["fit", "--dataset", str(data), "--out", str(fits)]) == 0
    report_dir = tmp_path / "report"
    assert (
        cli.main(["eval", "--fits", str(fits), "--dataset", str(data), "--out", str(report_dir)])
        == 0
    )

    lines = (report_dir / "report.csv").read_text().splitlines()
    labels = [line.split(",")[0] for line in lines[1:]]
    layout_ok = labels == list(suite) + ["all"]
    report = read_json(report_dir / "report.json")
    short = report["short_cells"]
    short_ok = (
        short["pct_correct_row_count"] >= 95.0 and short["pct_correct_col_count"] >= 95.0
    )
    ok = layout_ok and short_ok
    _report(
        "criterion 7",
        ok,
        f"per-configuration rows {labels}; short_cells rows "
        f"{short['pct_correct_row_count']:.1f}% cols {short['pct_correct_col_count']:.1f}%",
    )
