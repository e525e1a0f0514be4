"""Synthetic ground-truth fields, mixed-noise injection, and constraint-radius
calibration.

Fields are built as real parts of mode sums ``Re(sum_i phi_i xi_i lam_i^t)``
with the full mode set, amplitudes, and per-pair component fields recorded
exactly, so decomposition outputs can be checked against known truth.
Corruption is a pure function of (field, noise spec): Gaussian noise from a
counter-based generator, then a without-replacement fraction of entries
overwritten by salt-and-pepper extremes or zeroed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .dmd import DmdModes
from .exceptions import DimensionError
from .field import Field, reshape

# ---------------------------------------------------------------------------
# spatial patterns
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Sinusoid:
    """Complex plane wave ``exp(i 2 pi (fv u + fh v) + i phase)`` over the
    unit square; complex-valued, so a conjugate pair carries a traveling wave."""

    fv: float
    fh: float
    phase: float = 0.0


@dataclass(frozen=True)
class Blob:
    """Real Gaussian bump centered at (cv, ch) in unit coordinates."""

    cv: float
    ch: float
    sigma: float = 0.2


@dataclass(frozen=True)
class Constant:
    """Flat unit pattern."""


Pattern = Union[Sinusoid, Blob, Constant]


def _render(pattern: Pattern, n1: int, n2: int) -> np.ndarray:
    u = (np.arange(n1) + 0.5)[:, np.newaxis] / n1
    v = (np.arange(n2) + 0.5)[np.newaxis, :] / n2
    if isinstance(pattern, Sinusoid):
        grid = np.exp(1j * (2.0 * np.pi * (pattern.fv * u + pattern.fh * v) + pattern.phase))
    elif isinstance(pattern, Blob):
        grid = np.exp(-((u - pattern.cv) ** 2 + (v - pattern.ch) ** 2) / (2.0 * pattern.sigma**2))
        grid = grid.astype(np.complex128)
    elif isinstance(pattern, Constant):
        grid = np.ones((n1, n2), dtype=np.complex128)
    else:
        raise DimensionError(f"unknown pattern {pattern!r}")
    flat = grid.ravel()
    return flat / np.linalg.norm(flat)


# ---------------------------------------------------------------------------
# ground-truth generation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModeSpec:
    """One generator mode: eigenvalue, spatial pattern, complex amplitude.

    Give only pair leaders (``Im lam >= 0``); the conjugate partner of any
    oscillatory mode is added automatically.
    """

    lam: complex
    pattern: Pattern
    xi: complex


@dataclass(frozen=True)
class SyntheticSpec:
    n1: int
    n2: int
    m: int
    modes: tuple
    target_range: Optional[tuple[float, float]] = (-0.5, 0.5)

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1 or self.m < 1:
            raise DimensionError("spec dimensions must be positive")
        if not self.modes:
            raise DimensionError("spec must contain at least one mode")
        for spec in self.modes:
            if abs(spec.lam) > 1.0 + 1e-12:
                raise DimensionError(f"eigenvalue {spec.lam} outside the unit disk")
            if spec.lam.imag < 0.0:
                raise DimensionError(
                    "give pair leaders only (nonnegative imaginary part); "
                    "conjugates are generated"
                )
        if self.target_range is not None and self.target_range[1] <= self.target_range[0]:
            raise DimensionError("target range must be increasing")


@dataclass(frozen=True)
class GroundTruth:
    """Exact post-scaling decomposition of a generated field.

    ``components[i]`` is the pair-closed real contribution of leader/real mode
    i; followers map to their leader's component.
    """

    phi: np.ndarray
    lam: np.ndarray
    xi: np.ndarray
    pair_index: np.ndarray
    components: dict
    field: Field

    def as_modes(self) -> DmdModes:
        n1, n2, m = self.field.n1, self.field.n2, self.field.m
        return DmdModes(
            phi=self.phi, lam=self.lam, pair_index=self.pair_index,
            n1=n1, n2=n2, m=m,
        )


def generate_synthetic(spec: SyntheticSpec) -> tuple[Field, GroundTruth]:
    """Render a field from a mode spec and record its exact decomposition.

    Scaling into the target range is a pure rescale (no shift): values end up
    spanning exactly the range's width, preserving the mode decomposition.
    """
    n = spec.n1 * spec.n2
    phi_cols, lams, xis = [], [], []
    leader_of = []  # closed-set index of each entry's pair leader
    for entry in spec.modes:
        phi = _render(entry.pattern, spec.n1, spec.n2)
        idx = len(lams)
        phi_cols.append(phi)
        lams.append(complex(entry.lam))
        xis.append(complex(entry.xi))
        leader_of.append(idx)
        if entry.lam.imag > 0.0:
            phi_cols.append(np.conj(phi))
            lams.append(np.conj(complex(entry.lam)))
            xis.append(np.conj(complex(entry.xi)))
            leader_of.append(idx)

    r = len(lams)
    phi = np.stack(phi_cols, axis=1)
    lam = np.array(lams, dtype=np.complex128)
    xi = np.array(xis, dtype=np.complex128)
    pair_index = np.arange(r, dtype=np.intp)
    for i in range(r):
        j = leader_of[i]
        if j != i:
            pair_index[i], pair_index[j] = j, i

    powers = np.empty((r, spec.m), dtype=np.complex128)
    powers[:, 0] = 1.0
    for t in range(1, spec.m):
        powers[:, t] = powers[:, t - 1] * lam

    snaps = (phi * xi[np.newaxis, :]) @ powers
    values = np.real(snaps).T.ravel()
    span = float(values.max() - values.min())
    if span == 0.0:
        if float(np.max(np.abs(values))) == 0.0:
            raise DimensionError("spec generates an all-zero field")
        scale = 1.0
    elif spec.target_range is None:
        scale = 1.0
    else:
        scale = (spec.target_range[1] - spec.target_range[0]) / span
    values = values * scale
    xi = xi * scale

    components = {}
    for i in range(r):
        if leader_of[i] != i:
            continue
        idx = [i] if pair_index[i] == i else [i, int(pair_index[i])]
        part = (phi[:, idx] * xi[idx][np.newaxis, :]) @ powers[idx, :]
        components[i] = reshape(
            np.real(part).T.ravel(), spec.n1, spec.n2, spec.m
        )
    field = reshape(values, spec.n1, spec.n2, spec.m)
    return field, GroundTruth(
        phi=phi, lam=lam, xi=xi, pair_index=pair_index,
        components=components, field=field,
    )


def _wavenumbers() -> list[tuple[int, int]]:
    # (1,2), (2,1), (2,2), (1,3), (3,1), ... — lowest mixed wavenumbers first
    ranked = sorted(
        (max(a, b), a + b, a, b)
        for a in range(1, 9)
        for b in range(1, 9)
        if (a, b) != (1, 1)
    )
    return [(a, b) for _, _, a, b in ranked]


def default_mode_bank(pairs: int, real_modes: int) -> tuple[ModeSpec, ...]:
    """Deterministic mode family for configs: sustained conjugate-pair
    oscillations with decreasing amplitude and distinct wavenumbers, plus
    optional decaying real blob modes."""
    if pairs < 0 or real_modes < 0 or pairs + real_modes == 0:
        raise DimensionError("need a positive number of modes")
    specs = []
    waves = _wavenumbers()
    for k in range(pairs):
        theta = np.pi * (k + 1) / (2.0 * (pairs + 1))
        fv, fh = waves[k % len(waves)]
        specs.append(
            ModeSpec(
                lam=np.exp(1j * theta),
                pattern=Sinusoid(fv=float(fv), fh=float(fh), phase=0.3 * k),
                xi=(1.0 + 0.2j) / (k + 1),
            )
        )
    for k in range(real_modes):
        specs.append(
            ModeSpec(
                lam=complex(0.97 ** (k + 1)),
                pattern=Blob(cv=0.3 + 0.4 * k / max(real_modes, 1), ch=0.5, sigma=0.15),
                xi=complex(0.5 / (k + 1)),
            )
        )
    return tuple(specs)


# ---------------------------------------------------------------------------
# noise injection
# ---------------------------------------------------------------------------

SALT_PEPPER = "salt-pepper"
MISSING = "missing"


@dataclass(frozen=True)
class NoiseSpec:
    """Mixed-noise description: Gaussian level, corruption ratio, outlier kind,
    and the seed that makes injection a pure function."""

    sigma: float
    ps: float
    kind: str = SALT_PEPPER
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise DimensionError("sigma must be nonnegative")
        if not 0.0 <= self.ps < 1.0:
            raise DimensionError("corruption ratio must lie in [0, 1)")
        if self.kind not in (SALT_PEPPER, MISSING):
            raise DimensionError(f"unknown noise kind {self.kind!r}")


def _gaussian_stream(rng: np.random.Generator, count: int) -> np.ndarray:
    """Standard normals via Box-Muller on the raw uniform stream."""
    pairs = (count + 1) // 2
    u1 = rng.random(pairs)
    u2 = rng.random(pairs)
    # guard against log(0); the generator never returns 1.0 exactly
    radius = np.sqrt(-2.0 * np.log1p(-u1))
    angle = 2.0 * np.pi * u2
    z = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])
    return z[:count]


def corrupt(field: Field, noise: NoiseSpec) -> Field:
    """Apply Gaussian noise everywhere, then overwrite an exact-count fraction
    of positions with outliers.

    Salt-and-pepper replaces each chosen entry with the input field's minimum
    or maximum (fair coin); missing sets it to zero.  Deterministic given the
    seed: same inputs, bit-identical output.
    """
    rng = np.random.Generator(np.random.Philox(noise.seed))
    values = field.values.copy()
    total = values.size
    if noise.sigma > 0.0:
        values = values + noise.sigma * _gaussian_stream(rng, total)
    count = int(np.floor(noise.ps * total))
    if count > 0:
        scores = rng.random(total)
        positions = np.argsort(scores, kind="stable")[:count]
        if noise.kind == SALT_PEPPER:
            lo, hi = float(field.values.min()), float(field.values.max())
            coins = rng.random(count) < 0.5
            values[positions] = np.where(coins, hi, lo)
        else:
            values[positions] = 0.0
    return reshape(values, field.n1, field.n2, field.m)


# ---------------------------------------------------------------------------
# constraint-radius calibration
# ---------------------------------------------------------------------------


def radius_eps(sigma: float, ps: float, n_total: int, alpha: float) -> float:
    """Fidelity radius ``alpha * sigma * sqrt((1 - ps) * n_total)``."""
    if sigma < 0 or ps < 0 or n_total < 0 or alpha < 0:
        raise DimensionError("radius inputs must be nonnegative")
    return alpha * sigma * float(np.sqrt((1.0 - ps) * n_total))


def radius_eta_saltpepper(ps: float, n_total: int, alpha: float) -> float:
    """Sparse budget ``alpha * ps * n_total / 2`` for salt-and-pepper outliers."""
    if ps < 0 or n_total < 0 or alpha < 0:
        raise DimensionError("radius inputs must be nonnegative")
    return alpha * ps * n_total / 2.0


def radius_eta_missing(observed: Field, ps: float, alpha: float) -> float:
    """Sparse budget ``alpha * ps * ||observed||_1 / (1 - ps)`` for zeroed entries."""
    if not 0.0 <= ps < 1.0:
        raise DimensionError("corruption ratio must lie in [0, 1)")
    if alpha < 0:
        raise DimensionError("alpha must be nonnegative")
    return alpha * ps * float(np.abs(observed.values).sum()) / (1.0 - ps)
