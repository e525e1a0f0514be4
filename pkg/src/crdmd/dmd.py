"""Standard DMD mode extraction, amplitudes, mode scoring, and reconstruction.

Mode extraction follows the reduced-operator route: truncated SVD of the
leading snapshot matrix, projection of the one-step evolution operator onto
the left singular basis, eigendecomposition of the small projected operator,
and lifting of its eigenvectors back to full space.  The decomposition model
is ``X ~ Phi diag(xi) C`` with ``C`` the Vandermonde matrix of eigenvalue
powers; its vectorized form is the column-wise Khatri-Rao operator
``T = C^T (.) Phi`` mapping amplitudes to fields.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .exceptions import DimensionError, FormatError
from .field import Field, reshape
from .linalg import eig_small, truncated_svd
from .prox import GroupLayout

PAIR_REAL = "real"
PAIR_LEADER = "leader"
PAIR_FOLLOWER = "follower"


@dataclass(frozen=True)
class DmdModes:
    """Spatial modes, eigenvalues, and conjugate-pair bookkeeping.

    ``pair_index[i]`` holds the position of mode i's conjugate partner (itself
    for real modes).  ``n1, n2, m`` record the field geometry the modes were
    extracted from; ``m`` also fixes the Vandermonde length.
    """

    phi: np.ndarray
    lam: np.ndarray
    pair_index: np.ndarray
    n1: int
    n2: int
    m: int
    a_tilde: Optional[np.ndarray] = None
    rank_reduced: bool = False

    def __post_init__(self):
        if self.phi.shape != (self.n1 * self.n2, self.lam.size):
            raise DimensionError(
                f"mode matrix shape {self.phi.shape} does not match "
                f"{self.n1 * self.n2} pixels x {self.lam.size} modes"
            )
        if self.pair_index.size != self.lam.size:
            raise DimensionError("pair index length does not match mode count")

    @property
    def r(self) -> int:
        return self.lam.size

    @property
    def n(self) -> int:
        return self.n1 * self.n2

    def pair_tag(self, i: int) -> str:
        if self.pair_index[i] == i:
            return PAIR_REAL
        return PAIR_LEADER if self.lam[i].imag > 0 else PAIR_FOLLOWER

    def leaders(self) -> np.ndarray:
        """Indices of real modes and pair leaders (one per oscillation)."""
        return np.array(
            [i for i in range(self.r) if self.pair_tag(i) != PAIR_FOLLOWER],
            dtype=np.intp,
        )

    def validate_pairing(self, tol: float = 1e-10) -> None:
        for i in range(self.r):
            j = int(self.pair_index[i])
            if int(self.pair_index[j]) != i:
                raise DimensionError(f"pair link {i}<->{j} is not symmetric")
            if j == i:
                if self.lam[i].imag != 0.0:
                    raise DimensionError(f"unpaired complex eigenvalue at {i}")
                continue
            if self.lam[j] != np.conj(self.lam[i]):
                raise DimensionError(f"eigenvalues {i}, {j} are not conjugate")
            scale = max(float(np.max(np.abs(self.phi[:, i]))), 1e-300)
            if float(np.max(np.abs(self.phi[:, j] - np.conj(self.phi[:, i])))) > tol * scale:
                raise DimensionError(f"mode columns {i}, {j} are not conjugate")


def extract_modes(data: Field, r: int) -> DmdModes:
    """Extract r DMD modes from a field.

    Uses snapshots 1..M-1 and 2..M; on rank deficiency the result carries
    fewer modes with ``rank_reduced`` set.
    """
    if data.m < 2:
        raise DimensionError("mode extraction needs at least two snapshots")
    if not 1 <= r <= min(data.n, data.m - 1):
        raise DimensionError(
            f"rank {r} invalid for {data.n} pixels and {data.m} snapshots"
        )
    snaps = data.snapshot_matrix()
    x, x_next = snaps[:, :-1], snaps[:, 1:]
    svd = truncated_svd(x, r)
    proj = x_next @ (svd.v / svd.s[np.newaxis, :])
    a_tilde = svd.u.T @ proj
    eig = eig_small(a_tilde)
    phi = proj.astype(np.complex128) @ eig.vectors
    # rebuild follower columns as bitwise conjugates of their leaders
    for i in range(eig.values.size):
        j = int(eig.pair_index[i])
        if j != i and eig.values[i].imag > 0:
            phi[:, j] = np.conj(phi[:, i])
    return DmdModes(
        phi=phi,
        lam=eig.values,
        pair_index=eig.pair_index,
        n1=data.n1,
        n2=data.n2,
        m=data.m,
        a_tilde=a_tilde,
        rank_reduced=svd.rank_reduced,
    )


def energy_rank(data: Field, fraction: float) -> int:
    """Smallest rank whose singular values capture the given energy fraction."""
    if not 0.0 < fraction <= 1.0:
        raise DimensionError(f"energy fraction must lie in (0, 1], got {fraction}")
    snaps = data.snapshot_matrix()[:, :-1]
    s = np.linalg.svd(snaps, compute_uv=False)
    energy = np.cumsum(s**2)
    total = energy[-1]
    if total == 0.0:
        return 1
    return int(np.searchsorted(energy, fraction * total - 1e-15) + 1)


def vandermonde(lam: np.ndarray, m: int) -> np.ndarray:
    """Vandermonde matrix ``C[i, j] = lam_i**j`` for j = 0..m-1.

    Built by cumulative products so conjugate eigenvalue rows are bitwise
    conjugates.
    """
    lam = np.asarray(lam, dtype=np.complex128).ravel()
    c = np.empty((lam.size, m), dtype=np.complex128)
    c[:, 0] = 1.0
    for j in range(1, m):
        c[:, j] = c[:, j - 1] * lam
    return c


class ModeDictionary:
    """The amplitude-to-field operator ``T`` and its realified form.

    ``T`` maps amplitudes to the canonical vector of ``Phi diag(xi) C`` and is
    applied implicitly mode-by-mode, never materialized in the solvers.  The
    realified map ``T_R = [Re T, -Im T]`` acts on stacked (real, imaginary)
    amplitude parts; its natural group layout pairs the real and imaginary
    part of each mode.
    """

    def __init__(self, modes: DmdModes):
        self.modes = modes
        self.c = vandermonde(modes.lam, modes.m)

    @property
    def r(self) -> int:
        return self.modes.r

    def xi_layout(self) -> GroupLayout:
        return GroupLayout.interleaved(2, self.r)

    def apply(self, xi: np.ndarray) -> np.ndarray:
        """``T xi`` as a complex canonical vector of length N*m."""
        xi = np.asarray(xi, dtype=np.complex128).ravel()
        if xi.size != self.r:
            raise DimensionError(f"{xi.size} amplitudes for {self.r} modes")
        snaps = (self.modes.phi * xi[np.newaxis, :]) @ self.c
        return snaps.T.ravel()

    def apply_adjoint(self, y: np.ndarray) -> np.ndarray:
        """``T^H y`` for a canonical vector y (real or complex)."""
        y = np.asarray(y).ravel()
        if y.size != self.modes.n * self.modes.m:
            raise DimensionError("vector length does not match field size")
        snaps = y.reshape(self.modes.m, self.modes.n).T
        b = self.modes.phi.conj().T @ snaps
        return np.sum(b * np.conj(self.c), axis=1)

    def apply_real(self, xi_r: np.ndarray) -> np.ndarray:
        """``T_R xi_R`` — the real field vector of stacked (Re, Im) amplitudes."""
        xi_r = np.asarray(xi_r, dtype=np.float64).ravel()
        if xi_r.size != 2 * self.r:
            raise DimensionError(f"expected {2 * self.r} realified amplitudes")
        return np.real(self.apply(xi_r[: self.r] + 1j * xi_r[self.r :]))

    def adjoint_real(self, y: np.ndarray) -> np.ndarray:
        """``T_R^T y`` for a real canonical vector y."""
        w = self.apply_adjoint(np.asarray(y, dtype=np.float64))
        return np.concatenate([np.real(w), np.imag(w)])

    def t_matrix(self) -> np.ndarray:
        """Materialized ``T`` (N*m x r); for tests and small problems only."""
        cols = [
            np.kron(self.c[i, :], self.modes.phi[:, i]) for i in range(self.r)
        ]
        return np.stack(cols, axis=1)

    def t_real_matrix(self) -> np.ndarray:
        """Materialized ``T_R = [Re T, -Im T]`` (N*m x 2r)."""
        t = self.t_matrix()
        return np.concatenate([np.real(t), -np.imag(t)], axis=1)


@dataclass(frozen=True)
class LsFit:
    """Least-squares amplitudes with the fit residual.

    ``rank_deficient`` flags a singular reduced system solved in the
    minimum-norm sense.
    """

    xi: np.ndarray
    residual: float
    rank_deficient: bool = False


def fit_amplitudes_ls(modes: DmdModes, data: Field) -> LsFit:
    """Solve ``min_xi || X - Phi diag(xi) C ||_F`` with conjugate symmetry.

    The system is reduced to independent real parameters (one per real mode,
    a real/imaginary pair per conjugate pair), so the returned amplitudes are
    exactly conjugate-symmetric.
    """
    if (data.n1, data.n2, data.m) != (modes.n1, modes.n2, modes.m):
        raise DimensionError("field geometry does not match the modes")
    dictionary = ModeDictionary(modes)
    t = dictionary.t_matrix()
    x = data.values

    columns = []
    param_map = []  # (mode index, "real" | "re" | "im")
    for i in range(modes.r):
        tag = modes.pair_tag(i)
        if tag == PAIR_REAL:
            columns.append(np.real(t[:, i]))
            param_map.append((i, "real"))
        elif tag == PAIR_LEADER:
            columns.append(2.0 * np.real(t[:, i]))
            param_map.append((i, "re"))
            columns.append(-2.0 * np.imag(t[:, i]))
            param_map.append((i, "im"))
    a = np.stack(columns, axis=1)
    coeffs, _, rank, _ = np.linalg.lstsq(a, x, rcond=None)

    xi = np.zeros(modes.r, dtype=np.complex128)
    for value, (i, kind) in zip(coeffs, param_map):
        if kind == "real":
            xi[i] = value
        elif kind == "re":
            xi[i] += value
        else:
            xi[i] += 1j * value
    for i in range(modes.r):
        if modes.pair_tag(i) == PAIR_LEADER:
            xi[int(modes.pair_index[i])] = np.conj(xi[i])
    residual = float(np.linalg.norm(a @ coeffs - x))
    return LsFit(xi=xi, residual=residual, rank_deficient=rank < a.shape[1])


def mode_importance(modes: DmdModes, xi_pre: np.ndarray) -> np.ndarray:
    """Per-mode importance: amplitude magnitude times mode norm, summed over
    the eigenvalue's power decay across all m snapshots.

    Uses the geometric closed form away from the unit circle and the exact
    m-term count on it.
    """
    xi_pre = np.asarray(xi_pre, dtype=np.complex128).ravel()
    if xi_pre.size != modes.r:
        raise DimensionError(f"{xi_pre.size} amplitudes for {modes.r} modes")
    mags = np.abs(modes.lam)
    mode_norms = np.linalg.norm(modes.phi, axis=0)
    geom = np.where(
        mags == 1.0,
        float(modes.m),
        np.divide(
            1.0 - mags**modes.m,
            1.0 - mags,
            out=np.full(modes.r, float(modes.m)),
            where=mags != 1.0,
        ),
    )
    return np.abs(xi_pre) * mode_norms * geom


def importance_weights(p: np.ndarray) -> np.ndarray:
    """Inverse-importance weights.

    ``nu_i = (1/p_i) / sum_j (1/p_j)`` over the nonzero entries; modes with
    zero importance get weight 1.
    """
    p = np.asarray(p, dtype=np.float64).ravel()
    if np.any(p < 0):
        raise DimensionError("importance values must be nonnegative")
    nu = np.ones_like(p)
    nonzero = p > 0
    if np.any(nonzero):
        inv = 1.0 / p[nonzero]
        nu[nonzero] = inv / inv.sum()
    return nu


@dataclass(frozen=True)
class Amplitudes:
    """Amplitude vector with its importance scores and weights."""

    xi: np.ndarray
    importance: np.ndarray
    weights: np.ndarray


def score_amplitudes(modes: DmdModes, xi: np.ndarray) -> Amplitudes:
    """Bundle amplitudes with their importance scores and inverse weights."""
    p = mode_importance(modes, xi)
    return Amplitudes(
        xi=np.asarray(xi, dtype=np.complex128).ravel(),
        importance=p,
        weights=importance_weights(p),
    )


def _check_pair_closed(modes: DmdModes, keep: np.ndarray) -> None:
    kept = set(int(i) for i in keep)
    for i in kept:
        if int(modes.pair_index[i]) not in kept:
            raise DimensionError(
                f"selection splits the conjugate pair ({i}, {int(modes.pair_index[i])})"
            )


def reconstruct(modes: DmdModes, xi: np.ndarray, keep=None) -> Field:
    """Real field built from a pair-closed subset of modes.

    With bitwise-conjugate pairs the imaginary parts cancel exactly, so the
    real part is the full content.
    """
    xi = np.asarray(xi, dtype=np.complex128).ravel()
    if xi.size != modes.r:
        raise DimensionError(f"{xi.size} amplitudes for {modes.r} modes")
    if keep is None:
        keep = np.arange(modes.r)
    keep = np.asarray(keep, dtype=np.intp).ravel()
    _check_pair_closed(modes, keep)
    if keep.size == 0:
        return reshape(
            np.zeros(modes.n * modes.m), modes.n1, modes.n2, modes.m
        )
    c = vandermonde(modes.lam[keep], modes.m)
    snaps = (modes.phi[:, keep] * xi[keep][np.newaxis, :]) @ c
    return reshape(np.real(snaps).T.ravel(), modes.n1, modes.n2, modes.m)


def select_modes(
    modes: DmdModes,
    importance: np.ndarray,
    k: Optional[int] = None,
    threshold: Optional[float] = None,
) -> np.ndarray:
    """Most significant modes, expanded to conjugate-pair closure.

    Either the top ``k`` by importance or everything at/above ``threshold``.
    Ties break toward larger eigenvalue magnitude, then smaller phase, then
    lower index.
    """
    importance = np.asarray(importance, dtype=np.float64).ravel()
    if importance.size != modes.r:
        raise DimensionError("importance length does not match mode count")
    if (k is None) == (threshold is None):
        raise DimensionError("provide exactly one of k or threshold")
    order = sorted(
        range(modes.r),
        key=lambda i: (
            -importance[i],
            -abs(modes.lam[i]),
            abs(np.angle(modes.lam[i])),
            i,
        ),
    )
    if k is not None:
        if not 0 <= k <= modes.r:
            raise DimensionError(f"k={k} out of range for {modes.r} modes")
        chosen = set(order[:k])
    else:
        chosen = {i for i in range(modes.r) if importance[i] >= threshold}
    for i in list(chosen):
        chosen.add(int(modes.pair_index[i]))
    return np.array(sorted(chosen), dtype=np.intp)


# ---------------------------------------------------------------------------
# persistence: CSV for people and plots, a flat binary for pipeline stages
# ---------------------------------------------------------------------------

_MODES_MAGIC = b"MDS1"
_MODES_HEADER = struct.Struct("<4sIIII")


def export_modes_csv(path, modes: DmdModes, amplitudes: Amplitudes,
                     active: Optional[Sequence[int]] = None) -> None:
    """Write the mode table: index, eigenvalue, amplitude, importance, weight,
    pair link, and (when given) an active flag."""
    active_set = None if active is None else set(int(i) for i in active)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = [
            "index", "re_lambda", "im_lambda", "re_xi", "im_xi",
            "importance", "weight", "pair_index",
        ]
        if active_set is not None:
            header.append("active")
        writer.writerow(header)
        for i in range(modes.r):
            row = [
                i,
                repr(float(modes.lam[i].real)),
                repr(float(modes.lam[i].imag)),
                repr(float(amplitudes.xi[i].real)),
                repr(float(amplitudes.xi[i].imag)),
                repr(float(amplitudes.importance[i])),
                repr(float(amplitudes.weights[i])),
                int(modes.pair_index[i]),
            ]
            if active_set is not None:
                row.append(int(i in active_set))
            writer.writerow(row)


def save_modes(path, modes: DmdModes, amplitudes: Amplitudes) -> None:
    """Write modes and amplitudes as a deterministic flat binary (MDS1).

    Layout: magic; u32 r, n1, n2, m; i32 pair links; then float64 blocks for
    eigenvalues (re, im), modes (re, im, C-order N x r), amplitudes, scores,
    and weights.  Byte-identical for identical inputs.
    """
    with open(path, "wb") as fh:
        fh.write(_MODES_HEADER.pack(_MODES_MAGIC, modes.r, modes.n1, modes.n2, modes.m))
        fh.write(modes.pair_index.astype("<i4").tobytes())
        for block in (
            np.real(modes.lam), np.imag(modes.lam),
            np.real(modes.phi).ravel(), np.imag(modes.phi).ravel(),
            np.real(amplitudes.xi), np.imag(amplitudes.xi),
            amplitudes.importance, amplitudes.weights,
        ):
            fh.write(np.ascontiguousarray(block, dtype="<f8").tobytes())


def load_modes(path) -> tuple[DmdModes, Amplitudes]:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _MODES_HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, r, n1, n2, m = _MODES_HEADER.unpack_from(raw)
    if magic != _MODES_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    n = n1 * n2
    expected = _MODES_HEADER.size + 4 * r + 8 * (2 * r + 2 * n * r + 4 * r)
    if len(raw) != expected:
        raise FormatError(f"{path}: size {len(raw)} does not match header")
    off = _MODES_HEADER.size
    pair_index = np.frombuffer(raw, dtype="<i4", count=r, offset=off).astype(np.intp)
    off += 4 * r

    def take(count):
        nonlocal off
        block = np.frombuffer(raw, dtype="<f8", count=count, offset=off)
        off += 8 * count
        return block.astype(np.float64)

    lam = take(r) + 1j * take(r)
    phi = (take(n * r) + 1j * take(n * r)).reshape(n, r)
    xi = take(r) + 1j * take(r)
    importance = take(r)
    weights = take(r)
    if not (
        np.all(np.isfinite(lam.view(np.float64)))
        and np.all(np.isfinite(phi.view(np.float64)))
    ):
        raise FormatError(f"{path}: non-finite values")
    modes = DmdModes(phi=phi, lam=lam, pair_index=pair_index, n1=n1, n2=n2, m=m)
    return modes, Amplitudes(xi=xi, importance=importance, weights=weights)
