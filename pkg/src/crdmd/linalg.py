"""Dense linear-algebra kernels: truncated SVD, small eigendecompositions with
exact conjugate pairing, and power-iteration singular-value estimates.

SVD and eigendecomposition are backed by LAPACK (via numpy); outputs are
post-processed into a deterministic convention: singular/eigen-vectors are
rescaled so their largest-magnitude component is positive real, and the
eigenvalues of real matrices form bitwise-exact conjugate pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError, NumericalError

_POWER_ITER_CAP = 10_000


@dataclass(frozen=True)
class TruncatedSvd:
    """Top-r singular triplets of a real matrix.

    ``rank_reduced`` flags that the requested rank exceeded the numerical rank
    and fewer triplets were returned.
    """

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray
    rank_reduced: bool = False

    @property
    def rank(self) -> int:
        return self.s.size


@dataclass(frozen=True)
class SmallEig:
    """Full spectrum of a small real matrix.

    ``pair_index[i]`` is the position of the conjugate partner of eigenvalue i
    (itself for real eigenvalues); paired entries are bitwise conjugates.
    """

    values: np.ndarray
    vectors: np.ndarray
    pair_index: np.ndarray


def truncated_svd(x: np.ndarray, r: int) -> TruncatedSvd:
    """Top-r SVD of a real matrix, deterministic sign convention."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DimensionError("matrix must be finite")
    if not 1 <= r <= min(x.shape):
        raise DimensionError(f"rank {r} invalid for shape {x.shape}")
    try:
        u, s, vt = np.linalg.svd(x, full_matrices=False)
    except np.linalg.LinAlgError as err:
        raise NumericalError(f"SVD failed to converge: {err}") from err

    tol = max(x.shape) * np.finfo(np.float64).eps * (s[0] if s.size else 0.0)
    numerical_rank = int(np.sum(s > tol))
    rank_reduced = r > numerical_rank
    r_eff = min(r, max(numerical_rank, 1))

    u, s, v = u[:, :r_eff].copy(), s[:r_eff].copy(), vt[:r_eff].T.copy()
    for i in range(r_eff):
        j = int(np.argmax(np.abs(u[:, i])))
        if u[j, i] < 0:
            u[:, i] = -u[:, i]
            v[:, i] = -v[:, i]
    return TruncatedSvd(u, s, v, rank_reduced)


def pair_conjugates(values: np.ndarray) -> np.ndarray:
    """Match complex eigenvalues of a real matrix into conjugate pairs.

    Returns the partner index per entry (self for real eigenvalues).  Pairing
    is greedy nearest-conjugate, which is exact for LAPACK output where pairs
    agree to rounding.
    """
    values = np.asarray(values)
    n = values.size
    partner = np.arange(n)
    used = np.zeros(n, dtype=bool)
    for i in range(n):
        if used[i] or values[i].imag == 0.0:
            continue
        candidates = [
            j
            for j in range(i + 1, n)
            if not used[j] and values[j].imag * values[i].imag < 0.0
        ]
        if not candidates:
            raise NumericalError(
                f"eigenvalue {values[i]} has no conjugate partner"
            )
        dist = [abs(values[j] - np.conj(values[i])) for j in candidates]
        j = candidates[int(np.argmin(dist))]
        partner[i], partner[j] = j, i
        used[i] = used[j] = True
    return partner


def _canonical_phase(vec: np.ndarray) -> np.ndarray:
    """Rotate so the largest-magnitude component is positive real, unit norm."""
    k = int(np.argmax(np.abs(vec)))
    pivot = vec[k]
    if pivot != 0:
        vec = vec * (np.conj(pivot) / abs(pivot))
    nrm = np.linalg.norm(vec)
    return vec / nrm if nrm > 0 else vec


def eig_small(a: np.ndarray) -> SmallEig:
    """Eigendecomposition of a small real matrix with exact conjugate pairing.

    Pair followers are rewritten as bitwise conjugates of their leaders (the
    entry with positive imaginary part), and every eigenvector is put in the
    canonical phase/sign convention.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DimensionError("matrix must be finite")
    try:
        values, vectors = np.linalg.eig(a)
    except np.linalg.LinAlgError as err:
        raise NumericalError(f"eigendecomposition failed: {err}") from err

    values = values.astype(np.complex128)
    vectors = vectors.astype(np.complex128)
    partner = pair_conjugates(values)

    for i in range(values.size):
        j = partner[i]
        if j == i:
            values[i] = complex(values[i].real, 0.0)
            vectors[:, i] = _canonical_phase(vectors[:, i])
        elif values[i].imag > 0:
            vectors[:, i] = _canonical_phase(vectors[:, i])
            values[j] = np.conj(values[i])
            vectors[:, j] = np.conj(vectors[:, i])
    return SmallEig(values, vectors, partner)


def max_singular_value(apply_fn, adjoint_fn, dim: int, tol: float = 1e-9) -> float:
    """Largest singular value of a linear map, by power iteration on A^H A.

    ``apply_fn``/``adjoint_fn`` map vectors of dimension ``dim`` forward and
    back; the start vector is deterministic.  Returns 0 for the zero operator;
    raises after 10 000 iterations without convergence.
    """
    if dim < 1:
        raise DimensionError("input dimension must be positive")
    # ramp added to break symmetry for maps whose top space is orthogonal to 1
    v = np.ones(dim) + np.linspace(0.0, 1e-3, dim)
    v = v / np.linalg.norm(v)
    sigma2 = 0.0
    for _ in range(_POWER_ITER_CAP):
        w = np.asarray(apply_fn(v))
        nw2 = float(np.real(np.vdot(w, w)))
        if nw2 == 0.0:
            return 0.0
        v_next = np.asarray(adjoint_fn(w))
        sigma2_next = nw2 / float(np.real(np.vdot(v, v)))
        nv = np.linalg.norm(v_next)
        if nv == 0.0:
            return float(np.sqrt(sigma2_next))
        v = v_next / nv
        if abs(sigma2_next - sigma2) <= tol * max(sigma2_next, 1e-300):
            return float(np.sqrt(sigma2_next))
        sigma2 = sigma2_next
    raise NumericalError("power iteration did not converge within 10000 steps")


def max_singular_value_matrix(a: np.ndarray, tol: float = 1e-9) -> float:
    """Convenience wrapper of :func:`max_singular_value` for explicit matrices."""
    a = np.asarray(a)
    if a.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {a.shape}")
    return max_singular_value(
        lambda v: a @ v, lambda w: a.conj().T @ w, a.shape[1], tol=tol
    )
