"""Generic preconditioned primal-dual splitting engine.

Solves problems of the form

    min  sum_i g_i(y_i) + sum_j h_j(z_j)   s.t.  z_j = sum_i L_{j,i} y_i

by iterating primal prox steps, primal extrapolation ``2 y+ - y``, and dual
steps expressed through the Moreau identity applied to the prox of each
``h_j``.  Per-block stepsizes are derived automatically from squared
operator-norm bounds of the couplings:

    gamma_{y_i} = 1 / sum_j bound(L_{j,i}),    gamma_{z_j} = 1 / n_primal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .exceptions import ConfigError, DimensionError, DivergenceError

ProxFn = Callable[[np.ndarray, float], np.ndarray]
ApplyFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class LinearCoupling:
    """A linear operator with its adjoint and a squared-operator-norm bound."""

    apply: ApplyFn
    adjoint: ApplyFn
    norm_bound: float


@dataclass(frozen=True)
class PpdsProblem:
    """Primal blocks, dual blocks, couplings, and prox handles.

    ``couplings`` maps ``(j, i)`` (dual j, primal i) to the coupling operator;
    absent entries are zero operators.  ``primal_prox[i]`` is the prox handle
    of ``g_i`` (``None`` means ``g_i = 0``); ``dual_base_prox[j]`` is the prox
    handle of ``h_j`` itself — the engine applies the Moreau transform, never
    a hand-written conjugate prox.
    """

    primal_dims: tuple[int, ...]
    dual_dims: tuple[int, ...]
    couplings: dict[tuple[int, int], LinearCoupling]
    primal_prox: tuple[Optional[ProxFn], ...]
    dual_base_prox: tuple[ProxFn, ...]

    def __post_init__(self):
        n, m = len(self.primal_dims), len(self.dual_dims)
        if len(self.primal_prox) != n or len(self.dual_base_prox) != m:
            raise ConfigError("prox handle counts do not match block counts")
        for (j, i) in self.couplings:
            if not (0 <= j < m and 0 <= i < n):
                raise ConfigError(f"coupling ({j}, {i}) references unknown blocks")


@dataclass(frozen=True)
class StepSizes:
    gamma_y: tuple[float, ...]
    gamma_z: tuple[float, ...]


@dataclass
class SolveReport:
    """Iterations used, final per-block relative changes, and the per-iteration
    history of the combined (max over monitored blocks) relative change."""

    iterations: int = 0
    residuals: dict = field(default_factory=dict)
    converged: bool = False
    history: list = field(default_factory=list)


def derive_stepsizes(problem: PpdsProblem) -> StepSizes:
    """Stepsizes from the structure of the problem (see module docstring)."""
    n = len(problem.primal_dims)
    gamma_y = []
    for i in range(n):
        total = sum(
            c.norm_bound for (j, k), c in problem.couplings.items() if k == i
        )
        if total <= 0.0:
            raise ConfigError(f"primal block {i} has zero coupling norm sum")
        gamma_y.append(1.0 / total)
    gamma_z = tuple(1.0 / n for _ in problem.dual_dims)
    return StepSizes(tuple(gamma_y), gamma_z)


def check_adjoints(problem: PpdsProblem, seed: int = 0, tol: float = 1e-10) -> None:
    """Verify every coupling's adjoint via the inner-product test."""
    rng = np.random.default_rng(seed)
    for (j, i), c in problem.couplings.items():
        x = rng.standard_normal(problem.primal_dims[i])
        y = rng.standard_normal(problem.dual_dims[j])
        lhs = float(np.dot(np.asarray(c.apply(x)), y))
        rhs = float(np.dot(x, np.asarray(c.adjoint(y))))
        scale = max(abs(lhs), abs(rhs), 1e-300)
        if abs(lhs - rhs) > tol * scale:
            raise ConfigError(
                f"coupling ({j}, {i}) fails the adjoint test: {lhs} vs {rhs}"
            )


def _relative_change(new: np.ndarray, old: np.ndarray) -> float:
    delta = float(np.linalg.norm(new - old))
    base = float(np.linalg.norm(old))
    return delta / base if base >= 1e-12 else delta


def solve(
    problem: PpdsProblem,
    stepsizes: StepSizes,
    init: Sequence[np.ndarray],
    tol: float = 1e-4,
    max_iter: int = 20_000,
    monitor: Optional[Sequence] = None,
    dual_init: Optional[Sequence[np.ndarray]] = None,
) -> tuple[list[np.ndarray], SolveReport]:
    """Run the iteration until every monitored block's relative change drops
    below ``tol`` or ``max_iter`` is hit.

    ``monitor`` lists block labels: ``"y0"``, ``"z1"``, ... (a bare integer i
    means ``"yi"``); by default every primal and dual block gates convergence.
    The relative change of block v is ``||v+ - v|| / ||v||`` with an absolute
    fallback ``||v+ - v||`` when ``||v|| < 1e-12``.  Raises
    :class:`DivergenceError` if any iterate becomes non-finite.
    """
    n, m = len(problem.primal_dims), len(problem.dual_dims)
    if len(init) != n:
        raise DimensionError(f"{len(init)} primal inits for {n} blocks")
    y = []
    for i, v in enumerate(init):
        v = np.asarray(v, dtype=np.float64).ravel()
        if v.size != problem.primal_dims[i]:
            raise DimensionError(
                f"init block {i} has length {v.size}, "
                f"expected {problem.primal_dims[i]}"
            )
        y.append(v.copy())
    if dual_init is None:
        z = [np.zeros(d) for d in problem.dual_dims]
    else:
        z = [np.asarray(v, dtype=np.float64).ravel().copy() for v in dual_init]

    if monitor is None:
        monitored = [f"y{i}" for i in range(n)] + [f"z{j}" for j in range(m)]
    else:
        monitored = [f"y{b}" if isinstance(b, int) else str(b) for b in monitor]
    for label in monitored:
        kind, idx = label[0], int(label[1:])
        if kind not in "yz" or idx >= (n if kind == "y" else m):
            raise DimensionError(f"unknown monitored block {label!r}")

    by_primal = [[] for _ in range(n)]
    by_dual = [[] for _ in range(m)]
    for (j, i), c in problem.couplings.items():
        by_primal[i].append((j, c))
        by_dual[j].append((i, c))

    report = SolveReport()
    for it in range(1, max_iter + 1):
        y_next = []
        for i in range(n):
            grad = np.zeros(problem.primal_dims[i])
            for j, c in by_primal[i]:
                grad += np.asarray(c.adjoint(z[j]))
            v = y[i] - stepsizes.gamma_y[i] * grad
            prox = problem.primal_prox[i]
            y_next.append(v if prox is None else np.asarray(prox(v, stepsizes.gamma_y[i])))
        y_bar = [2.0 * y_next[i] - y[i] for i in range(n)]

        z_next = []
        for j in range(m):
            gz = stepsizes.gamma_z[j]
            v = z[j].copy()
            for i, c in by_dual[j]:
                v += gz * np.asarray(c.apply(y_bar[i]))
            z_next.append(v - gz * np.asarray(problem.dual_base_prox[j](v / gz, 1.0 / gz)))

        residuals = {}
        for label in monitored:
            kind, idx = label[0], int(label[1:])
            if kind == "y":
                residuals[label] = _relative_change(y_next[idx], y[idx])
            else:
                residuals[label] = _relative_change(z_next[idx], z[idx])
        for i in range(n):
            if not np.all(np.isfinite(y_next[i])):
                raise DivergenceError(f"y{i}", it)
        for j in range(m):
            if not np.all(np.isfinite(z_next[j])):
                raise DivergenceError(f"z{j}", it)

        y, z = y_next, z_next
        report.iterations = it
        report.residuals = residuals
        report.history.append(max(residuals.values()))
        # the first iteration cannot move the primal blocks when the duals
        # start at zero, so never declare convergence on it
        if it >= 2 and all(r < tol for r in residuals.values()):
            report.converged = True
            break
    return y, report
