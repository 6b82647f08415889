import numpy as np
import pytest

from conftest import small_genotype
from tablefit.model import get_preset, sample_genotype
from tablefit.objectives import (
    LOG_EPS,
    ObjectiveSpec,
    candidate_phenotype,
    fitness,
    fitness_value,
    is_minimized,
    obj_discriminator,
    obj_l1,
    obj_nonoverlap,
    obj_weighted,
    objective_value,
)
from tablefit.raster import RasterImage
from tablefit.skeleton_source import SkeletonTarget, StubDiscriminator, oracle_skeleton


def test_objective_spec_validation():
    with pytest.raises(ValueError, match="unknown objective kind"):
        ObjectiveSpec("hamming")
    with pytest.raises(ValueError, match="requires a discriminator"):
        ObjectiveSpec("discriminator_logprob")
    with pytest.raises(ValueError, match="requires a discriminator"):
        ObjectiveSpec("weighted")
    with pytest.raises(ValueError, match="non-negative"):
        ObjectiveSpec("l1", lam=-1.0)
    # zero weight is a legal edge of the range
    ObjectiveSpec("weighted", lam=0.0, discriminator=StubDiscriminator())


def test_nonoverlap_zero_iff_identical_exhaustive_4x4():
    # every binary 4x4 image against itself: 0 unless blank, 1 when blank
    offsets = np.arange(16)
    for code in range(1 << 16):
        px = ((code >> offsets) & 1).reshape(4, 4).astype(np.float64)
        img = RasterImage(px)
        val = obj_nonoverlap(img, img)
        if px.min() == 1.0:
            assert val == 1.0
        else:
            assert val == 0.0


def test_nonoverlap_positive_on_single_pixel_flips(rng):
    for _ in range(200):
        bits = rng.integers(0, 2, (4, 4)).astype(np.float64)
        r, c = rng.integers(0, 4, 2)
        flipped = bits.copy()
        flipped[r, c] = 1.0 - flipped[r, c]
        a, b = RasterImage(bits), RasterImage(flipped)
        if bits.min() < 1.0 and flipped.min() < 1.0:
            assert obj_nonoverlap(a, b) > 0.0
        else:
            assert obj_nonoverlap(a, b) == 1.0


def test_nonoverlap_positive_on_random_distinct_pairs(rng):
    for _ in range(200):
        a = rng.integers(0, 2, (8, 8)).astype(np.float64)
        b = rng.integers(0, 2, (8, 8)).astype(np.float64)
        if np.array_equal(a, b) or a.min() == 1.0 or b.min() == 1.0:
            continue
        assert obj_nonoverlap(RasterImage(a), RasterImage(b)) > 0.0


def test_nonoverlap_blank_guards():
    white = RasterImage.blank(8, 8)
    inky = RasterImage(np.zeros((8, 8)))
    assert obj_nonoverlap(white, inky) == 1.0
    assert obj_nonoverlap(inky, white) == 1.0
    assert obj_nonoverlap(white, white) == 1.0


def test_nonoverlap_range_on_random_skeleton_pairs():
    config = get_preset("base")
    vals = []
    for seed in range(30):
        target = oracle_skeleton(sample_genotype(config, seed))
        cand = candidate_phenotype(sample_genotype(config, 1000 + seed))
        vals.append(obj_nonoverlap(target, cand))
    assert min(vals) >= 0.0
    print(f"nonoverlap over random skeleton pairs: max {max(vals):.6g}")


def test_l1_metric_axioms(rng):
    for _ in range(1000):
        a, b, c = (RasterImage(rng.random((8, 8))) for _ in range(3))
        dab = obj_l1(a, b)
        assert dab >= 0.0
        assert np.isclose(dab, obj_l1(b, a), atol=1e-12)
        assert dab <= obj_l1(a, c) + obj_l1(c, b) + 1e-9
        assert obj_l1(a, a) == 0.0


def test_l1_counts_flipped_pixels():
    a = np.ones((4, 4))
    b = a.copy()
    b[0, 0] = 0.0
    b[2, 3] = 0.5
    assert obj_l1(RasterImage(a), RasterImage(b)) == 1.5


def test_discriminator_objective_zero_at_perfect_match():
    spec = ObjectiveSpec("discriminator_logprob", discriminator=StubDiscriminator())
    target = oracle_skeleton(small_genotype())
    cand = candidate_phenotype(small_genotype())
    assert objective_value(spec, target, cand) == 0.0


def test_discriminator_objective_floor_keeps_values_finite():
    spec = ObjectiveSpec("discriminator_logprob", discriminator=StubDiscriminator())
    white = SkeletonTarget(RasterImage.blank(256, 256), "oracle")
    black = RasterImage.blank(256, 256, value=0.0)
    val = objective_value(spec, white, black)
    assert np.isfinite(val)
    assert np.isclose(val, np.log(LOG_EPS))


def test_weighted_lambda_zero_equals_discriminator():
    disc = StubDiscriminator()
    weighted = ObjectiveSpec("weighted", lam=0.0, discriminator=disc)
    plain = ObjectiveSpec("discriminator_logprob", discriminator=disc)
    target = oracle_skeleton(small_genotype())
    for seed in range(5):
        cand = candidate_phenotype(sample_genotype(get_preset("base"), seed))
        assert objective_value(weighted, target, cand) == objective_value(plain, target, cand)


def test_weighted_large_lambda_ranks_by_pixel_distance():
    spec = ObjectiveSpec("weighted", lam=1e9, discriminator=StubDiscriminator())
    target = oracle_skeleton(small_genotype())
    cands = [candidate_phenotype(sample_genotype(get_preset("base"), s)) for s in range(20)]
    w = np.array([objective_value(spec, target, c) for c in cands])
    l1 = np.array([obj_l1(target, c) for c in cands])
    assert len(set(l1.tolist())) == len(cands)
    assert np.argsort(-w).tolist() == np.argsort(l1).tolist()


def test_objective_value_dispatch_and_target_unwrap():
    target = oracle_skeleton(small_genotype())
    cand = candidate_phenotype(sample_genotype(get_preset("base"), 1))
    assert objective_value(ObjectiveSpec("l1"), target, cand) == obj_l1(target, cand)
    assert objective_value(ObjectiveSpec("nonoverlap"), target, cand) == obj_nonoverlap(
        target, cand
    )


def test_weighted_uses_explicit_scan_when_given():
    disc = StubDiscriminator()
    spec = ObjectiveSpec("weighted", lam=0.0, discriminator=disc)
    target = oracle_skeleton(small_genotype())
    cand = candidate_phenotype(small_genotype())
    # identical scan and candidate pin the discriminator term at its optimum
    assert objective_value(spec, target, cand, scan=cand) == 0.0
    assert objective_value(spec, target, cand) == obj_weighted(spec, target.image, target, cand)


def test_shape_mismatch_raises():
    with pytest.raises(ValueError, match="shapes differ"):
        obj_l1(RasterImage.blank(4, 4), RasterImage.blank(5, 5))
    with pytest.raises(ValueError, match="shapes differ"):
        obj_nonoverlap(RasterImage.blank(4, 4), RasterImage.blank(5, 5))


def test_discriminator_missing_raises():
    spec = ObjectiveSpec("nonoverlap")
    img = RasterImage.blank(256, 256)
    with pytest.raises(ValueError, match="requires a discriminator"):
        obj_discriminator(spec, img, img)


def test_fitness_negates_minimized_kinds():
    assert is_minimized("l1") and is_minimized("nonoverlap")
    assert not is_minimized("discriminator_logprob") and not is_minimized("weighted")
    assert fitness_value(ObjectiveSpec("nonoverlap"), 0.25) == -0.25
    disc_spec = ObjectiveSpec("discriminator_logprob", discriminator=StubDiscriminator())
    assert fitness_value(disc_spec, -3.0) == -3.0


def test_fitness_ordering_matches_objective():
    spec = ObjectiveSpec("nonoverlap")
    target = oracle_skeleton(small_genotype())
    cands = [candidate_phenotype(sample_genotype(get_preset("base"), s)) for s in range(10)]
    objs = [objective_value(spec, target, c) for c in cands]
    fits = [fitness(spec, target, c) for c in cands]
    assert int(np.argmax(fits)) == int(np.argmin(objs))
