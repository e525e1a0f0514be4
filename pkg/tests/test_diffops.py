import numpy as np
import pytest

from crdmd.diffops import apply_dw, apply_dw_adjoint, dw_norm_bound
from crdmd.exceptions import DimensionError
from crdmd.linalg import max_singular_value

from oracles import dense_dw

GRIDS = [(2, 2, 2), (5, 4, 3), (8, 8, 8)]


def test_constant_field_has_zero_differences():
    out = apply_dw(np.full(24, 3.7), 0.6, (2, 3, 4))
    assert np.array_equal(out, np.zeros(72))


def test_row_field_example():
    out = apply_dw(np.array([1.0, 2.0, 4.0]), 1.0, (1, 3, 1))
    assert np.array_equal(out[:3], [0.0, 0.0, 0.0])  # vertical
    assert np.array_equal(out[3:6], [1.0, 2.0, 0.0])  # horizontal
    assert np.array_equal(out[6:], [0.0, 0.0, 0.0])  # temporal (w=1)


def test_trailing_boundaries_are_exact_zero(rng):
    n1, n2, m = 4, 5, 3
    x = rng.standard_normal(n1 * n2 * m)
    out = apply_dw(x, 0.5, (n1, n2, m)).reshape(3, m, n1, n2)
    assert np.array_equal(out[0][:, -1, :], np.zeros((m, n2)))
    assert np.array_equal(out[1][:, :, -1], np.zeros((m, n1)))
    assert np.array_equal(out[2][-1], np.zeros((n1, n2)))


@pytest.mark.parametrize("dims", GRIDS)
def test_adjoint_identity(dims, rng):
    nm = dims[0] * dims[1] * dims[2]
    for _ in range(100):
        w = float(rng.uniform(0.0, 1.0))
        x = rng.standard_normal(nm)
        y = rng.standard_normal(3 * nm)
        lhs = float(np.dot(apply_dw(x, w, dims), y))
        rhs = float(np.dot(x, apply_dw_adjoint(y, w, dims)))
        assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), abs(rhs), 1.0)


def test_adjoint_of_zero_is_zero():
    out = apply_dw_adjoint(np.zeros(24), 0.3, (2, 2, 2))
    assert np.array_equal(out, np.zeros(8))


def test_dense_matrix_transpose_equivalence(rng):
    dims = (2, 2, 2)
    w = 0.7
    d = dense_dw(w, dims)
    adj_cols = np.stack(
        [apply_dw_adjoint(np.eye(24)[:, i], w, dims) for i in range(24)], axis=1
    )
    assert np.max(np.abs(adj_cols - d.T)) == 0.0


def test_linearity(rng):
    dims = (3, 4, 2)
    nm = 24
    x, y = rng.standard_normal(nm), rng.standard_normal(nm)
    a, b = 1.7, -0.4
    lhs = apply_dw(a * x + b * y, 0.4, dims)
    rhs = a * apply_dw(x, 0.4, dims) + b * apply_dw(y, 0.4, dims)
    assert np.max(np.abs(lhs - rhs)) <= 1e-13


def test_norm_bound_values():
    assert dw_norm_bound(0.0) == 4.0
    assert abs(dw_norm_bound(0.9) - 6.52) <= 1e-12
    assert abs(dw_norm_bound(0.3) - (0.72 + 1.96)) <= 1e-12


@pytest.mark.parametrize("w", [0.0, 0.3, 0.9, 1.0])
def test_power_iteration_below_bound(w):
    dims = (8, 8, 8)
    nm = 512
    sigma = max_singular_value(
        lambda v: apply_dw(v, w, dims),
        lambda u: apply_dw_adjoint(u, w, dims),
        nm,
    )
    assert sigma**2 <= dw_norm_bound(w) + 1e-9


def test_dimension_mismatch_raises():
    with pytest.raises(DimensionError):
        apply_dw(np.zeros(5), 0.5, (2, 2, 2))
    with pytest.raises(DimensionError):
        apply_dw_adjoint(np.zeros(5), 0.5, (2, 2, 2))
    with pytest.raises(DimensionError):
        apply_dw(np.zeros(8), 1.5, (2, 2, 2))
