import numpy as np
import pytest

from crdmd.dmd import reconstruct
from crdmd.exceptions import DimensionError
from crdmd.field import Field
from crdmd.linalg import truncated_svd
from crdmd.synthetic import (
    Blob,
    Constant,
    ModeSpec,
    NoiseSpec,
    Sinusoid,
    SyntheticSpec,
    corrupt,
    default_mode_bank,
    generate_synthetic,
    radius_eps,
    radius_eta_missing,
    radius_eta_saltpepper,
)


class TestGenerate:
    def test_single_constant_mode_gives_constant_field(self):
        spec = SyntheticSpec(
            4, 4, 3,
            modes=(ModeSpec(lam=1.0, pattern=Constant(), xi=2.0),),
            target_range=None,
        )
        field, gt = generate_synthetic(spec)
        assert np.max(np.abs(field.values - field.values[0])) == 0.0

    def test_ground_truth_roundtrip_is_exact(self, small_synthetic):
        field, gt = small_synthetic
        rebuilt = reconstruct(gt.as_modes(), gt.xi)
        assert np.max(np.abs(rebuilt.values - field.values)) <= 1e-12

    def test_three_pairs_have_numerical_rank_six(self, small_synthetic):
        field, _ = small_synthetic
        svd = truncated_svd(field.snapshot_matrix(), 8)
        assert svd.rank_reduced
        assert svd.rank == 6
        full = np.linalg.svd(field.snapshot_matrix(), compute_uv=False)
        assert full[5] / full[0] > 1e-8
        assert full[6] / full[0] < 1e-12

    def test_target_range_width(self, small_synthetic):
        field, _ = small_synthetic
        width = field.values.max() - field.values.min()
        assert abs(width - 1.0) <= 1e-12

    def test_conjugate_closure(self, small_synthetic):
        _, gt = small_synthetic
        gt.as_modes().validate_pairing()

    def test_rejects_followers_and_outside_disk(self):
        with pytest.raises(DimensionError):
            SyntheticSpec(2, 2, 2, (ModeSpec(0.5 - 0.5j, Constant(), 1.0),))
        with pytest.raises(DimensionError):
            SyntheticSpec(2, 2, 2, (ModeSpec(1.5, Constant(), 1.0),))

    def test_rejects_zero_field(self):
        spec = SyntheticSpec(
            2, 2, 2, (ModeSpec(1.0, Constant(), 0.0),), target_range=None
        )
        with pytest.raises(DimensionError):
            generate_synthetic(spec)

    def test_default_bank_shapes(self):
        bank = default_mode_bank(3, 2)
        assert len(bank) == 5
        assert all(abs(spec.lam) <= 1.0 for spec in bank)
        assert sum(isinstance(s.pattern, Blob) for s in bank) == 2
        assert sum(isinstance(s.pattern, Sinusoid) for s in bank) == 3


class TestCorrupt:
    def test_zero_noise_is_identity(self, random_field):
        f = random_field(4, 4, 3)
        out = corrupt(f, NoiseSpec(sigma=0.0, ps=0.0, seed=3))
        assert np.array_equal(out.values, f.values)

    def test_exact_corruption_count(self, rng):
        # all entries nonzero, so zeroed positions are exactly countable
        f = Field(10, 10, 10, 1.0 + rng.uniform(0.1, 1.0, 1000))
        out = corrupt(f, NoiseSpec(sigma=0.0, ps=0.1, kind="missing", seed=3))
        assert int(np.sum(out.values != f.values)) == 100

    def test_salt_pepper_values_at_extremes(self, random_field):
        f = random_field(8, 8, 4)
        out = corrupt(f, NoiseSpec(sigma=0.0, ps=0.2, kind="salt-pepper", seed=9))
        changed = out.values[out.values != f.values]
        lo, hi = f.values.min(), f.values.max()
        assert set(np.unique(changed)) <= {lo, hi}

    def test_missing_sets_exact_zeros(self, random_field):
        f = random_field(8, 8, 4, scale=2.0)
        out = corrupt(f, NoiseSpec(sigma=0.0, ps=0.25, kind="missing", seed=5))
        changed = np.flatnonzero(out.values != f.values)
        assert changed.size == int(0.25 * f.values.size)
        assert np.all(out.values[changed] == 0.0)

    def test_bitwise_determinism(self, random_field):
        f = random_field(6, 6, 6)
        spec = NoiseSpec(sigma=0.2, ps=0.1, kind="salt-pepper", seed=11)
        a = corrupt(f, spec)
        b = corrupt(f, spec)
        assert np.array_equal(
            a.values.view(np.uint64), b.values.view(np.uint64)
        )

    def test_different_seeds_differ(self, random_field):
        f = random_field(6, 6, 6)
        a = corrupt(f, NoiseSpec(sigma=0.1, ps=0.0, seed=1))
        b = corrupt(f, NoiseSpec(sigma=0.1, ps=0.0, seed=2))
        assert not np.array_equal(a.values, b.values)

    def test_gaussian_moments(self):
        f = Field(100, 100, 20, np.zeros(200_000))
        out = corrupt(f, NoiseSpec(sigma=0.5, ps=0.0, seed=21))
        assert abs(float(out.values.mean())) <= 0.01 * 0.5
        assert abs(float(out.values.std()) - 0.5) <= 0.01 * 0.5

    def test_invalid_spec(self):
        with pytest.raises(DimensionError):
            NoiseSpec(sigma=-0.1, ps=0.0)
        with pytest.raises(DimensionError):
            NoiseSpec(sigma=0.0, ps=1.0)
        with pytest.raises(DimensionError):
            NoiseSpec(sigma=0.0, ps=0.0, kind="speckle")


class TestRadii:
    def test_eps_examples(self):
        assert abs(radius_eps(0.1, 0.1, 1000, 0.91) - 2.73) <= 1e-12
        assert radius_eps(0.0, 0.3, 500, 0.95) == 0.0

    def test_eta_saltpepper_examples(self):
        assert abs(radius_eta_saltpepper(0.1, 1000, 0.91) - 45.5) <= 1e-12
        assert radius_eta_saltpepper(0.0, 1000, 0.91) == 0.0
        assert abs(radius_eta_saltpepper(0.05, 100, 1.0) - 2.5) <= 1e-12

    def test_eta_missing_examples(self):
        f = Field(1, 1, 3, np.array([30.0, -30.0, 30.0]))  # l1 norm 90
        assert abs(radius_eta_missing(f, 0.1, 1.0) - 10.0) <= 1e-12
        assert radius_eta_missing(f, 0.0, 0.9) == 0.0
        g = Field(1, 1, 2, np.array([100.0, -100.0]))  # l1 norm 200
        assert abs(radius_eta_missing(g, 0.05, 0.93) - 0.93 * 10.0 / 0.95) <= 1e-12

    def test_eta_missing_rejects_full_corruption(self):
        f = Field(1, 1, 1, np.array([1.0]))
        with pytest.raises(DimensionError):
            radius_eta_missing(f, 1.0, 0.9)
