"""Sklearn-style estimators wrapping the pipeline stages.

Data enters as a 3-d array of frames ``(m, n1, n2)`` (a :class:`Field` is
also accepted); outputs are frame arrays, so the stages compose with each
other and with the wider transformer ecosystem.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .denoise import DenoiseConfig, solve_preprocessing
from .dimred import DimredConfig, solve_dimred
from .dmd import (
    energy_rank,
    extract_modes,
    fit_amplitudes_ls,
    reconstruct,
    score_amplitudes,
    select_modes,
)
from .exceptions import ConfigError, DimensionError
from .field import Field, field_from_frames
from .synthetic import (
    MISSING,
    SALT_PEPPER,
    radius_eps,
    radius_eta_missing,
    radius_eta_saltpepper,
)


def as_field(X) -> Field:
    """Validate estimator input: a Field or a finite 3-d ``(m, n1, n2)`` array."""
    if isinstance(X, Field):
        return X
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 3:
        raise DimensionError(
            f"expected frames of shape (m, n1, n2), got shape {X.shape}"
        )
    if not np.all(np.isfinite(X)):
        raise DimensionError("input contains non-finite values")
    return field_from_frames(X)


def _resolve_radii(observed: Field, eps, eta, sigma, ps, kind, alpha):
    """Use explicit radii when given, else calibrate them from noise levels."""
    if eps is None:
        if sigma is None or ps is None:
            raise ConfigError("give eps explicitly or provide sigma and ps")
        eps = radius_eps(sigma, ps, observed.n * observed.m, alpha)
    if eta is None:
        if ps is None:
            raise ConfigError("give eta explicitly or provide ps")
        if kind == SALT_PEPPER:
            eta = radius_eta_saltpepper(ps, observed.n * observed.m, alpha)
        elif kind == MISSING:
            eta = radius_eta_missing(observed, ps, alpha)
        else:
            raise ConfigError(f"unknown noise kind {kind!r}")
    return float(eps), float(eta)


class MixedNoiseDenoiser(TransformerMixin, BaseEstimator):
    """Remove mixed Gaussian-plus-sparse noise from a spatio-temporal field.

    Either pass the constraint radii ``eps``/``eta`` directly, or pass the
    noise levels ``sigma``/``ps`` (with ``kind`` and ``alpha``) and let the
    radii be calibrated from them.

    Attributes after ``fit``: ``sparse_``, the estimated sparse-noise frames,
    and ``report_``, the solver report.
    """

    def __init__(self, eps=None, eta=None, w=0.5, sigma=None, ps=None,
                 kind=SALT_PEPPER, alpha=0.91, tol=1e-4, max_iter=20_000):
        self.eps = eps
        self.eta = eta
        self.w = w
        self.sigma = sigma
        self.ps = ps
        self.kind = kind
        self.alpha = alpha
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        as_field(X)
        return self

    def transform(self, X):
        observed = as_field(X)
        eps, eta = _resolve_radii(
            observed, self.eps, self.eta, self.sigma, self.ps, self.kind, self.alpha
        )
        config = DenoiseConfig(
            eps=eps, eta=eta, w=self.w, tol=self.tol, max_iter=self.max_iter
        )
        result = solve_preprocessing(observed, config)
        self.sparse_ = result.s.frames().copy()
        self.report_ = result.report
        return result.x.frames().copy()


class DynamicModeDecomposition(BaseEstimator):
    """Extract modes, eigenvalues, and least-squares amplitudes from a field.

    ``rank`` fixes the truncation directly; otherwise the smallest rank
    capturing ``energy`` of the squared singular values is used.

    Attributes after ``fit``: ``modes_`` (the full mode bundle),
    ``eigenvalues_``, ``amplitudes_``, ``importance_``, ``weights_``,
    ``pair_index_``, ``rank_``.
    """

    def __init__(self, rank=None, energy=0.999):
        self.rank = rank
        self.energy = energy

    def fit(self, X, y=None):
        data = as_field(X)
        r = self.rank if self.rank is not None else energy_rank(data, self.energy)
        self.modes_ = extract_modes(data, r)
        fitted = fit_amplitudes_ls(self.modes_, data)
        scored = score_amplitudes(self.modes_, fitted.xi)
        self.eigenvalues_ = self.modes_.lam.copy()
        self.amplitudes_ = scored.xi
        self.importance_ = scored.importance
        self.weights_ = scored.weights
        self.pair_index_ = self.modes_.pair_index.copy()
        self.rank_ = self.modes_.r
        self.residual_ = fitted.residual
        return self

    def reconstruct(self, keep=None, n_modes=None):
        """Frames rebuilt from all modes, an index subset, or the top
        ``n_modes`` by importance (pair-closed)."""
        if n_modes is not None:
            keep = select_modes(self.modes_, self.importance_, k=n_modes)
        return reconstruct(self.modes_, self.amplitudes_, keep).frames().copy()


class SparseModeReducer(TransformerMixin, BaseEstimator):
    """Re-estimate amplitudes of extracted modes against a noisy observation,
    with group sparsity selecting the active modes.

    ``decomposition`` is a fitted :class:`DynamicModeDecomposition`; its
    importance weights steer the sparsity term.  Radii follow the same
    explicit-or-calibrated convention as :class:`MixedNoiseDenoiser`.

    Attributes after ``transform``: ``amplitudes_``, ``active_modes_``,
    ``sparse_``, ``report_``.
    """

    def __init__(self, decomposition=None, mu=0.01, eps=None, eta=None, w=0.5,
                 sigma=None, ps=None, kind=SALT_PEPPER, alpha=0.86,
                 tol=1e-4, max_iter=20_000):
        self.decomposition = decomposition
        self.mu = mu
        self.eps = eps
        self.eta = eta
        self.w = w
        self.sigma = sigma
        self.ps = ps
        self.kind = kind
        self.alpha = alpha
        self.tol = tol
        self.max_iter = max_iter

    def _modes(self):
        if self.decomposition is None or not hasattr(self.decomposition, "modes_"):
            raise ConfigError("decomposition must be a fitted DynamicModeDecomposition")
        return self.decomposition

    def fit(self, X, y=None):
        as_field(X)
        self._modes()
        return self

    def transform(self, X):
        observed = as_field(X)
        decomp = self._modes()
        eps, eta = _resolve_radii(
            observed, self.eps, self.eta, self.sigma, self.ps, self.kind, self.alpha
        )
        config = DimredConfig(
            eps=eps, eta=eta, w=self.w, mu=self.mu,
            tol=self.tol, max_iter=self.max_iter,
        )
        result = solve_dimred(
            observed, decomp.modes_, decomp.weights_, config,
            xi0=decomp.amplitudes_,
        )
        self.amplitudes_ = result.xi
        self.active_modes_ = result.active_groups
        self.sparse_ = result.s.frames().copy()
        self.report_ = result.report
        return result.reconstruction.frames().copy()
