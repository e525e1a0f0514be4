"""Mixed-noise preprocessing: spatio-temporal TV minimization under an l2
fidelity ball and an l1 sparse-noise budget.

    min_{x, s}  || D_w x ||_{1,2}
    s.t.        x + s  in  B2(observed, eps),    s in B1(eta)

Solved by the primal-dual engine with primal blocks (x, s), dual blocks
z1 = D_w x (group-sparse norm) and z2 = x + s (fidelity ball indicator).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diffops import apply_dw, apply_dw_adjoint, check_weight, dw_norm_bound
from .exceptions import ConfigError
from .field import Field, reshape, vectorize
from .ppds import LinearCoupling, PpdsProblem, SolveReport, StepSizes, solve
from .prox import GroupLayout, project_l1_ball, project_l2_ball, prox_l12


@dataclass(frozen=True)
class DenoiseConfig:
    """Radii and solver settings for the preprocessing problem.

    ``eps`` bounds the joint Gaussian-noise energy, ``eta`` the l1 mass of the
    sparse-noise component; ``w`` balances spatial versus temporal smoothness.
    """

    eps: float
    eta: float
    w: float = 0.5
    tol: float = 1e-4
    max_iter: int = 20_000

    def __post_init__(self):
        if self.eps < 0 or self.eta < 0:
            raise ConfigError("radii must be nonnegative")
        if not 0.0 <= self.w <= 1.0:
            raise ConfigError(f"w must lie in [0, 1], got {self.w}")
        if self.tol <= 0 or self.max_iter < 1:
            raise ConfigError("tol must be positive and max_iter at least 1")


@dataclass(frozen=True)
class DenoiseResult:
    x: Field
    s: Field
    report: SolveReport


def preprocessing_stepsizes(w: float) -> StepSizes:
    """Closed-form stepsizes for the preprocessing structure:
    ``gamma_x = 1 / (1 + 8 w^2 + 4 (1-w)^2)``, ``gamma_s = 1``, duals 1/2.
    """
    check_weight(w)
    return StepSizes(
        gamma_y=(1.0 / (1.0 + dw_norm_bound(w)), 1.0),
        gamma_z=(0.5, 0.5),
    )


def build_preprocessing_problem(observed: Field, config: DenoiseConfig) -> PpdsProblem:
    dims = observed.dims
    nm = observed.n * observed.m
    x_tilde = vectorize(observed)
    w = config.w
    tv_layout = GroupLayout.interleaved(3, nm)

    couplings = {
        (0, 0): LinearCoupling(
            apply=lambda v: apply_dw(v, w, dims),
            adjoint=lambda u: apply_dw_adjoint(u, w, dims),
            norm_bound=dw_norm_bound(w),
        ),
        (1, 0): LinearCoupling(lambda v: v, lambda u: u, 1.0),
        (1, 1): LinearCoupling(lambda v: v, lambda u: u, 1.0),
    }
    return PpdsProblem(
        primal_dims=(nm, nm),
        dual_dims=(3 * nm, nm),
        couplings=couplings,
        primal_prox=(None, lambda v, t: project_l1_ball(v, config.eta)),
        dual_base_prox=(
            lambda v, t: prox_l12(v, t, tv_layout),
            lambda v, t: project_l2_ball(v, x_tilde, config.eps),
        ),
    )


def solve_preprocessing(
    observed: Field, config: DenoiseConfig, init=None
) -> DenoiseResult:
    """Remove mixed noise from an observed field.

    Starts from ``x = observed, s = 0`` unless ``init`` supplies the pair
    ``(x0, s0)``; the problem is convex, so the solution does not depend on
    the start.  Non-convergence at ``max_iter`` is reported, not raised.
    """
    problem = build_preprocessing_problem(observed, config)
    x_tilde = vectorize(observed)
    if init is None:
        init = (x_tilde, np.zeros_like(x_tilde))
    blocks, report = solve(
        problem,
        preprocessing_stepsizes(config.w),
        init=init,
        tol=config.tol,
        max_iter=config.max_iter,
        monitor=("y0", "y1"),
    )
    n1, n2, m = observed.dims
    return DenoiseResult(
        x=reshape(blocks[0], n1, n2, m),
        s=reshape(blocks[1], n1, n2, m),
        report=report,
    )
