"""Proximity operators and projections used by both solvers.

Prox handles across the package follow one convention: a handle is a callable
``prox(v, t)`` returning ``argmin_y f(y) + ||v - y||^2 / (2 t)``, i.e. the
proximity operator of ``t * f`` at ``v``.
"""

from __future__ import annotations

import numpy as np

from .exceptions import DimensionError


class GroupLayout:
    """Partition of the indices of a vector into disjoint, exhaustive groups.

    Two variants cover everything the solvers need:

    * ``contiguous(sizes)`` — groups are consecutive runs of the given sizes.
    * ``interleaved(n_blocks, n_groups)`` — the vector is ``n_blocks`` stacked
      blocks of length ``n_groups``; group g collects element g of every
      block.  This is the layout of stacked difference directions (3 blocks of
      N*m pixels) and of realified amplitudes (2 blocks of r modes).
    """

    def __init__(self, kind: str, size: int, n_groups: int, meta):
        self.kind = kind
        self.size = size
        self.n_groups = n_groups
        self._meta = meta

    @classmethod
    def contiguous(cls, sizes) -> "GroupLayout":
        sizes = np.asarray(sizes, dtype=np.intp)
        if sizes.size == 0 or np.any(sizes < 1):
            raise DimensionError("group sizes must be positive")
        starts = np.concatenate(([0], np.cumsum(sizes)[:-1]))
        return cls("contiguous", int(sizes.sum()), sizes.size, (sizes, starts))

    @classmethod
    def interleaved(cls, n_blocks: int, n_groups: int) -> "GroupLayout":
        if n_blocks < 1 or n_groups < 1:
            raise DimensionError("block and group counts must be positive")
        return cls("interleaved", n_blocks * n_groups, n_groups, n_blocks)

    def _as_matrix(self, x: np.ndarray) -> np.ndarray:
        return x.reshape(self._meta, self.n_groups)

    def group_norms(self, x: np.ndarray) -> np.ndarray:
        """Euclidean norm of every group, shape ``(n_groups,)``."""
        x = self.check(x)
        if self.kind == "interleaved":
            return np.sqrt(np.sum(self._as_matrix(x) ** 2, axis=0))
        sizes, starts = self._meta
        return np.sqrt(np.add.reduceat(x * x, starts))

    def scale_groups(self, x: np.ndarray, factors: np.ndarray) -> np.ndarray:
        """Multiply every group by its own scalar factor."""
        x = self.check(x)
        if self.kind == "interleaved":
            return (self._as_matrix(x) * factors[np.newaxis, :]).ravel()
        sizes, _ = self._meta
        return x * np.repeat(factors, sizes)

    def check(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64).ravel()
        if x.size != self.size:
            raise DimensionError(
                f"vector of length {x.size} does not match layout of size {self.size}"
            )
        return x


def prox_l12(x, gamma: float, layout: GroupLayout, weights=None) -> np.ndarray:
    """Group soft shrinkage: prox of ``gamma * sum_g w_g ||x_g||_2``.

    Each group is scaled by ``max(1 - gamma*w_g / ||x_g||, 0)``; a group with
    zero norm maps to zero (the limit of the shrinkage factor).
    """
    if gamma <= 0:
        raise DimensionError(f"gamma must be positive, got {gamma}")
    x = layout.check(x)
    norms = layout.group_norms(x)
    thresh = np.full(layout.n_groups, float(gamma))
    if weights is not None:
        weights = np.asarray(weights, dtype=np.float64).ravel()
        if weights.size != layout.n_groups:
            raise DimensionError(
                f"{weights.size} weights for {layout.n_groups} groups"
            )
        thresh = gamma * weights
    with np.errstate(divide="ignore", invalid="ignore"):
        factors = np.where(norms > 0.0, 1.0 - thresh / norms, 0.0)
    np.maximum(factors, 0.0, out=factors)
    return layout.scale_groups(x, factors)


def project_l2_ball(x, center, eps: float) -> np.ndarray:
    """Euclidean projection onto the l2 ball of radius ``eps`` around ``center``."""
    x = np.asarray(x, dtype=np.float64).ravel()
    center = np.asarray(center, dtype=np.float64).ravel()
    if x.size != center.size:
        raise DimensionError("point and center dimensions differ")
    if eps < 0:
        raise DimensionError(f"radius must be nonnegative, got {eps}")
    diff = x - center
    dist = float(np.linalg.norm(diff))
    if dist <= eps:
        return x.copy()
    if dist == 0.0:
        return center.copy()
    return center + (eps / dist) * diff


def project_l1_ball(x, eta: float) -> np.ndarray:
    """Euclidean projection onto ``{y : ||y||_1 <= eta}``.

    Sort-based exact thresholding; signs are preserved and interior points
    are returned unchanged.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    if eta < 0:
        raise DimensionError(f"radius must be nonnegative, got {eta}")
    absx = np.abs(x)
    if absx.sum() <= eta:
        return x.copy()
    if eta == 0.0:
        return np.zeros_like(x)
    u = np.sort(absx)[::-1]
    cssu = np.cumsum(u)
    k = np.arange(1, u.size + 1)
    rho = int(np.max(np.nonzero(u * k > cssu - eta)[0])) + 1
    tau = (cssu[rho - 1] - eta) / rho
    return np.sign(x) * np.maximum(absx - tau, 0.0)


def moreau_conjugate_prox(prox_f, gamma: float, x) -> np.ndarray:
    """Prox of the convex conjugate, via Moreau's identity.

    ``prox_{gamma f*}(x) = x - gamma * prox_{(1/gamma) f}(x / gamma)`` where
    ``prox_f(v, t)`` evaluates the prox of ``t*f``.
    """
    if gamma <= 0:
        raise DimensionError(f"gamma must be positive, got {gamma}")
    x = np.asarray(x, dtype=np.float64).ravel()
    return x - gamma * np.asarray(prox_f(x / gamma, 1.0 / gamma))
