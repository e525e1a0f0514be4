"""Observation-referencing dimensional reduction.

Estimates sparse, smoothness-regularized mode amplitudes directly against the
noisy observation:

    min_{xi, s}  || D_w T xi ||_{1,2}  +  mu * || nu o xi ||_1
    s.t.         T xi + s  in  B2(observed, eps),    s in B1(eta)

The complex amplitudes are optimized in realified form ``xi_R = (Re xi; Im xi)``
with ``T_R = [Re T, -Im T]``; the weighted l1 term becomes a weighted group
norm over (real, imaginary) pairs, so each mode switches on or off as a unit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diffops import apply_dw, apply_dw_adjoint, check_weight, dw_norm_bound
from .dmd import DmdModes, ModeDictionary
from .exceptions import ConfigError, DimensionError
from .field import Field, reshape, vectorize
from .linalg import max_singular_value_matrix
from .ppds import LinearCoupling, PpdsProblem, SolveReport, StepSizes, solve
from .prox import GroupLayout, project_l1_ball, project_l2_ball, prox_l12


@dataclass(frozen=True)
class DimredConfig:
    """Radii, smoothness balance, sparsity weight, and solver settings."""

    eps: float
    eta: float
    w: float = 0.5
    mu: float = 0.01
    tol: float = 1e-4
    max_iter: int = 20_000

    def __post_init__(self):
        if self.eps < 0 or self.eta < 0 or self.mu < 0:
            raise ConfigError("eps, eta, and mu must be nonnegative")
        if not 0.0 <= self.w <= 1.0:
            raise ConfigError(f"w must lie in [0, 1], got {self.w}")
        if self.tol <= 0 or self.max_iter < 1:
            raise ConfigError("tol must be positive and max_iter at least 1")


@dataclass(frozen=True)
class DimredResult:
    xi: np.ndarray
    s: Field
    reconstruction: Field
    active_groups: np.ndarray
    report: SolveReport


def realify(modes: DmdModes, nu: np.ndarray):
    """Realified operator, doubled weights, and the (Re, Im) group layout.

    Requires pair-closed modes; weights double as ``(nu; nu)`` and each group
    g collects the real and imaginary part of amplitude g.
    """
    modes.validate_pairing()
    nu = np.asarray(nu, dtype=np.float64).ravel()
    if nu.size != modes.r:
        raise DimensionError(f"{nu.size} weights for {modes.r} modes")
    dictionary = ModeDictionary(modes)
    nu_under = np.concatenate([nu, nu])
    return dictionary, nu_under, dictionary.xi_layout()


def dimred_stepsizes(modes: DmdModes, w: float) -> StepSizes:
    """Stepsizes from the singular values of the Vandermonde and mode matrices:
    ``gamma_xi = 1 / (s1(C)^2 s1(Phi)^2 (1 + 8 w^2 + 4 (1-w)^2))``."""
    check_weight(w)
    dictionary = ModeDictionary(modes)
    sigma_c = max_singular_value_matrix(dictionary.c)
    sigma_phi = max_singular_value_matrix(modes.phi)
    t_bound = (sigma_c * sigma_phi) ** 2
    if t_bound <= 0.0:
        raise ConfigError("mode dictionary is the zero operator")
    return StepSizes(
        gamma_y=(1.0 / (t_bound * (1.0 + dw_norm_bound(w))), 1.0),
        gamma_z=(0.5, 0.5),
    )


def build_dimred_problem(
    observed: Field, modes: DmdModes, nu: np.ndarray, config: DimredConfig
) -> PpdsProblem:
    dims = observed.dims
    nm = observed.n * observed.m
    x_tilde = vectorize(observed)
    w, mu = config.w, config.mu
    dictionary, nu_under, xi_layout = realify(modes, nu)
    tv_layout = GroupLayout.interleaved(3, nm)

    t_bound = (
        max_singular_value_matrix(dictionary.c)
        * max_singular_value_matrix(modes.phi)
    ) ** 2

    if mu > 0.0:
        weights = nu_under[: modes.r]

        def xi_prox(v, t):
            return prox_l12(v, t * mu, xi_layout, weights=weights)

    else:
        xi_prox = None

    couplings = {
        (0, 0): LinearCoupling(
            apply=lambda v: apply_dw(dictionary.apply_real(v), w, dims),
            adjoint=lambda u: dictionary.adjoint_real(
                apply_dw_adjoint(u, w, dims)
            ),
            norm_bound=t_bound * dw_norm_bound(w),
        ),
        (1, 0): LinearCoupling(
            apply=dictionary.apply_real,
            adjoint=dictionary.adjoint_real,
            norm_bound=t_bound,
        ),
        (1, 1): LinearCoupling(lambda v: v, lambda u: u, 1.0),
    }
    return PpdsProblem(
        primal_dims=(2 * modes.r, nm),
        dual_dims=(3 * nm, nm),
        couplings=couplings,
        primal_prox=(xi_prox, lambda v, t: project_l1_ball(v, config.eta)),
        dual_base_prox=(
            lambda v, t: prox_l12(v, t, tv_layout),
            lambda v, t: project_l2_ball(v, x_tilde, config.eps),
        ),
    )


def solve_dimred(
    observed: Field,
    modes: DmdModes,
    nu: np.ndarray,
    config: DimredConfig,
    xi0=None,
) -> DimredResult:
    """Estimate amplitudes against the noisy observation.

    ``xi0`` seeds the iteration (complex, length r) — typically the
    least-squares amplitudes against the denoised field; zeros otherwise.
    Convexity makes the solution independent of the seed.
    """
    problem = build_dimred_problem(observed, modes, nu, config)
    if xi0 is None:
        xi_r0 = np.zeros(2 * modes.r)
    else:
        xi0 = np.asarray(xi0, dtype=np.complex128).ravel()
        if xi0.size != modes.r:
            raise DimensionError(f"{xi0.size} seed amplitudes for {modes.r} modes")
        xi_r0 = np.concatenate([np.real(xi0), np.imag(xi0)])
    nm = observed.n * observed.m
    blocks, report = solve(
        problem,
        dimred_stepsizes(modes, config.w),
        init=(xi_r0, np.zeros(nm)),
        tol=config.tol,
        max_iter=config.max_iter,
        monitor=("y0", "y1"),
    )
    xi_r, s = blocks
    xi = xi_r[: modes.r] + 1j * xi_r[modes.r :]
    dictionary = ModeDictionary(modes)
    recon = dictionary.apply_real(xi_r)
    n1, n2, m = observed.dims
    layout = dictionary.xi_layout()
    active = np.nonzero(layout.group_norms(xi_r) > 0.0)[0]
    return DimredResult(
        xi=xi,
        s=reshape(s, n1, n2, m),
        reconstruction=reshape(recon, n1, n2, m),
        active_groups=active.astype(np.intp),
        report=report,
    )
