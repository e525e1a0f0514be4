import numpy as np
import pytest

from crdmd.exceptions import DimensionError
from crdmd.prox import (
    GroupLayout,
    moreau_conjugate_prox,
    project_l1_ball,
    project_l2_ball,
    prox_l12,
)

from oracles import l1_projection_threshold_scan, solve_prox_l12


def soft_threshold(v, t):
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


class TestGroupLayout:
    def test_contiguous_norms(self):
        lay = GroupLayout.contiguous([2, 3])
        x = np.array([3.0, 4.0, 1.0, 2.0, 2.0])
        assert np.allclose(lay.group_norms(x), [5.0, 3.0])

    def test_interleaved_norms(self):
        lay = GroupLayout.interleaved(2, 3)
        x = np.array([3.0, 1.0, 0.0, 4.0, 1.0, 2.0])
        assert np.allclose(lay.group_norms(x), [5.0, np.sqrt(2.0), 2.0])

    def test_scale_groups_roundtrip(self):
        lay = GroupLayout.interleaved(3, 4)
        x = np.arange(12, dtype=float)
        assert np.array_equal(lay.scale_groups(x, np.ones(4)), x)

    def test_size_mismatch(self):
        with pytest.raises(DimensionError):
            GroupLayout.contiguous([2, 2]).group_norms(np.zeros(5))


class TestProxL12:
    def test_zero_input(self):
        lay = GroupLayout.contiguous([2, 2])
        assert np.array_equal(prox_l12(np.zeros(4), 1.0, lay), np.zeros(4))

    def test_single_group_example(self):
        lay = GroupLayout.contiguous([2])
        out = prox_l12(np.array([3.0, 4.0]), 1.0, lay)
        assert np.allclose(out, [2.4, 3.2], atol=1e-15)

    def test_below_threshold_group_is_exactly_zero(self):
        lay = GroupLayout.contiguous([2, 2])
        x = np.array([0.1, 0.1, 5.0, 0.0])
        out = prox_l12(x, 1.0, lay)
        assert out[0] == 0.0 and out[1] == 0.0
        assert out[2] > 0.0

    def test_weighted_threshold(self):
        lay = GroupLayout.contiguous([2, 2])
        x = np.array([3.0, 4.0, 3.0, 4.0])
        out = prox_l12(x, 1.0, lay, weights=[1.0, 5.0])
        assert np.allclose(out[:2], [2.4, 3.2])
        assert np.array_equal(out[2:], [0.0, 0.0])

    def test_zero_weight_group_passes_through(self):
        lay = GroupLayout.contiguous([2])
        x = np.array([0.3, -0.4])
        assert np.array_equal(prox_l12(x, 2.0, lay, weights=[0.0]), x)

    def test_matches_interior_point_oracle(self, rng):
        for _ in range(25):
            sizes = [int(rng.integers(1, 4)) for _ in range(int(rng.integers(1, 4)))]
            dim = sum(sizes)
            x = 2.0 * rng.standard_normal(dim)
            gamma = float(rng.uniform(0.1, 3.0))
            weights = rng.uniform(0.2, 2.0, len(sizes))
            ours = prox_l12(x, gamma, GroupLayout.contiguous(sizes), weights=weights)
            oracle = solve_prox_l12(x, gamma, sizes, weights)
            assert np.max(np.abs(ours - oracle)) <= 1e-6


class TestL2Ball:
    def test_interior_identity(self):
        x = np.array([0.2, 0.1])
        assert np.array_equal(project_l2_ball(x, np.zeros(2), 1.0), x)

    def test_radial_scaling(self):
        out = project_l2_ball(np.array([3.0, 4.0]), np.zeros(2), 1.0)
        assert np.allclose(out, [0.6, 0.8], atol=1e-15)

    def test_boundary_point_unchanged(self):
        out = project_l2_ball(np.array([4.0, 4.0]), np.array([1.0, 0.0]), 5.0)
        assert np.array_equal(out, [4.0, 4.0])

    def test_zero_radius_returns_center(self):
        center = np.array([1.0, -2.0])
        assert np.array_equal(project_l2_ball(np.array([5.0, 5.0]), center, 0.0), center)

    def test_idempotent_and_feasible(self, rng):
        for _ in range(50):
            x = 3.0 * rng.standard_normal(6)
            c = rng.standard_normal(6)
            eps = float(rng.uniform(0.0, 2.0))
            p = project_l2_ball(x, c, eps)
            assert np.linalg.norm(p - c) <= eps + 1e-12
            assert np.max(np.abs(project_l2_ball(p, c, eps) - p)) <= 1e-12

    def test_nonexpansive(self, rng):
        for _ in range(50):
            x, y = rng.standard_normal(5), rng.standard_normal(5)
            c = rng.standard_normal(5)
            px = project_l2_ball(x, c, 0.7)
            py = project_l2_ball(y, c, 0.7)
            assert np.linalg.norm(px - py) <= np.linalg.norm(x - y) + 1e-12


class TestL1Ball:
    def test_interior_identity(self):
        x = np.array([0.5, -0.5])
        assert np.array_equal(project_l1_ball(x, 2.0), x)

    def test_examples(self):
        assert np.allclose(project_l1_ball(np.array([3.0, 1.0]), 2.0), [2.0, 0.0])
        assert np.allclose(project_l1_ball(np.array([-3.0, 1.0]), 2.0), [-2.0, 0.0])

    def test_zero_radius(self):
        assert np.array_equal(project_l1_ball(np.array([1.0, -2.0]), 0.0), [0.0, 0.0])

    def test_matches_threshold_scan(self, rng):
        for _ in range(200):
            x = 3.0 * rng.standard_normal(int(rng.integers(1, 9)))
            eta = float(rng.uniform(0.0, 4.0))
            ours = project_l1_ball(x, eta)
            oracle = l1_projection_threshold_scan(x, eta)
            assert np.max(np.abs(ours - oracle)) <= 1e-10
            assert np.abs(ours).sum() <= eta + 1e-12

    def test_idempotent(self, rng):
        for _ in range(50):
            x = 3.0 * rng.standard_normal(7)
            p = project_l1_ball(x, 1.3)
            assert np.max(np.abs(project_l1_ball(p, 1.3) - p)) <= 1e-12

    def test_nonexpansive(self, rng):
        for _ in range(50):
            x, y = rng.standard_normal(6), rng.standard_normal(6)
            px, py = project_l1_ball(x, 1.1), project_l1_ball(y, 1.1)
            assert np.linalg.norm(px - py) <= np.linalg.norm(x - y) + 1e-12


class TestMoreau:
    def test_conjugate_of_absolute_value_clamps(self):
        for x, expected in [(2.0, 1.0), (0.5, 0.5), (-3.0, -1.0)]:
            out = moreau_conjugate_prox(soft_threshold, 1.0, np.array([x]))
            assert np.allclose(out, [expected], atol=1e-15)

    def test_moreau_decomposition_for_group_norm(self, rng):
        # prox_{g f}(x) + g * prox_{(1/g) f*}(x / g) = x
        lay = GroupLayout.contiguous([2, 3, 1])
        for _ in range(50):
            x = 2.0 * rng.standard_normal(6)
            gamma = float(rng.uniform(0.2, 3.0))
            prox_f = lambda v, t: prox_l12(v, t, lay)
            direct = prox_l12(x, gamma, lay)
            conj = gamma * moreau_conjugate_prox(prox_f, 1.0 / gamma, x / gamma)
            assert np.max(np.abs(direct + conj - x)) <= 1e-10
