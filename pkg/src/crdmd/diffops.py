"""Weighted forward-difference operators with Neumann boundaries.

``apply_dw`` stacks vertical, horizontal, and temporal forward differences of
a canonically vectorized field into one vector of length ``3*N*m``:

    D_w x = [ w * D_v x ; w * D_h x ; (1 - w) * D_t x ]

Differences are ``x[i+1] - x[i]`` along each direction, with the trailing
row/column/frame difference set to zero (Neumann).  The balance ``w`` in
[0, 1] trades spatial against temporal smoothness.
"""

from __future__ import annotations

import numpy as np

from .exceptions import DimensionError

Dims = tuple[int, int, int]


def _check(x: np.ndarray, dims: Dims, length: int, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size != length:
        raise DimensionError(
            f"{what} has length {x.size}, expected {length} for dims {dims}"
        )
    return x


def check_weight(w: float) -> float:
    w = float(w)
    if not 0.0 <= w <= 1.0:
        raise DimensionError(f"difference weight must lie in [0, 1], got {w}")
    return w


def apply_dw(x: np.ndarray, w: float, dims: Dims) -> np.ndarray:
    """Apply the stacked weighted difference operator D_w.

    Returns the blocks ``[vertical; horizontal; temporal]`` concatenated, each
    of length ``n1*n2*m``.
    """
    n1, n2, m = dims
    w = check_weight(w)
    x = _check(x, dims, n1 * n2 * m, "input")
    a = x.reshape(m, n1, n2)

    out = np.zeros((3, m, n1, n2))
    out[0, :, : n1 - 1, :] = a[:, 1:, :] - a[:, : n1 - 1, :]
    out[1, :, :, : n2 - 1] = a[:, :, 1:] - a[:, :, : n2 - 1]
    out[2, : m - 1, :, :] = a[1:, :, :] - a[: m - 1, :, :]
    out[0] *= w
    out[1] *= w
    out[2] *= 1.0 - w
    return out.ravel()


def apply_dw_adjoint(y: np.ndarray, w: float, dims: Dims) -> np.ndarray:
    """Apply the exact adjoint of :func:`apply_dw`.

    Satisfies ``<D_w x, y> == <x, D_w^T y>`` for all x, y.
    """
    n1, n2, m = dims
    w = check_weight(w)
    nm = n1 * n2 * m
    y = _check(y, dims, 3 * nm, "input")
    yv, yh, yt = (b.reshape(m, n1, n2) for b in (y[:nm], y[nm : 2 * nm], y[2 * nm :]))

    out = np.zeros((m, n1, n2))
    # adjoint of a forward difference with a zeroed trailing row: shifted
    # copy minus original, restricted to the rows that actually feed it
    out[:, 1:, :] += w * yv[:, : n1 - 1, :]
    out[:, : n1 - 1, :] -= w * yv[:, : n1 - 1, :]
    out[:, :, 1:] += w * yh[:, :, : n2 - 1]
    out[:, :, : n2 - 1] -= w * yh[:, :, : n2 - 1]
    out[1:, :, :] += (1.0 - w) * yt[: m - 1, :, :]
    out[: m - 1, :, :] -= (1.0 - w) * yt[: m - 1, :, :]
    return out.ravel()


def dw_norm_bound(w: float) -> float:
    """Upper bound on ``||D_w||_op^2``.

    Each directional forward-difference operator with Neumann ends has squared
    operator norm below 4, giving ``8*w^2 + 4*(1-w)^2`` for the stack.
    """
    w = check_weight(w)
    return 8.0 * w * w + 4.0 * (1.0 - w) * (1.0 - w)
