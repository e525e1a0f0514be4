"""Robust dynamic mode decomposition under mixed noise.

Three stages, each exposed both as plain functions and as sklearn-style
estimators: convex mixed-noise preprocessing, standard DMD mode extraction,
and sparse observation-referencing dimensional reduction.
"""

from .denoise import DenoiseConfig, DenoiseResult, solve_preprocessing
from .dimred import DimredConfig, DimredResult, solve_dimred
from .dmd import (
    Amplitudes,
    DmdModes,
    ModeDictionary,
    extract_modes,
    fit_amplitudes_ls,
    importance_weights,
    mode_importance,
    reconstruct,
    score_amplitudes,
    select_modes,
)
from .estimators import (
    DynamicModeDecomposition,
    MixedNoiseDenoiser,
    SparseModeReducer,
)
from .exceptions import (
    ConfigError,
    CrdmdError,
    DimensionError,
    DivergenceError,
    FormatError,
    NumericalError,
)
from .field import Field, field_from_frames, load, reshape, save, vectorize
from .metrics import TrialSet, eig_mse, eig_std, match_eigenvalues, mpsnr, mssim
from .synthetic import (
    NoiseSpec,
    SyntheticSpec,
    corrupt,
    generate_synthetic,
    radius_eps,
    radius_eta_missing,
    radius_eta_saltpepper,
)

__version__ = "0.1.0"

__all__ = [
    "Amplitudes",
    "ConfigError",
    "CrdmdError",
    "DenoiseConfig",
    "DenoiseResult",
    "DimensionError",
    "DimredConfig",
    "DimredResult",
    "DivergenceError",
    "DmdModes",
    "DynamicModeDecomposition",
    "Field",
    "FormatError",
    "MixedNoiseDenoiser",
    "ModeDictionary",
    "NoiseSpec",
    "NumericalError",
    "SparseModeReducer",
    "SyntheticSpec",
    "TrialSet",
    "corrupt",
    "eig_mse",
    "eig_std",
    "extract_modes",
    "field_from_frames",
    "fit_amplitudes_ls",
    "generate_synthetic",
    "importance_weights",
    "load",
    "match_eigenvalues",
    "mode_importance",
    "mpsnr",
    "mssim",
    "radius_eps",
    "radius_eta_missing",
    "radius_eta_saltpepper",
    "reconstruct",
    "reshape",
    "save",
    "score_amplitudes",
    "select_modes",
    "solve_dimred",
    "solve_preprocessing",
    "vectorize",
]
