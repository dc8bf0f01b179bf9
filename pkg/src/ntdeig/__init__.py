"""Dirichlet eigenmodes of star-shaped planar domains via the spectral flow of the weighted NtD map."""

from .estimators import ModeEstimate, estimate, fhat, khat_linear, khat_riccati
from .geometry import BoundaryNodes, CurveSpec, NotStarShapedError, default_n, discretize
from .harness import ComparisonReport, SweepConfig, fit_error_scaling, match_and_score, solvespectrum
from .layerops import LayerMatrix, assemble
from .ntdflow import NtdEigenpair, NtdSpectrum, SingularSystemError, ntd_spectrum_cayley, ntd_spectrum_direct, select_window
from .reconstruct import eval_mode, interior_grid
from .reference import ReferenceConfig, ReferenceMode, find_eigenfrequencies, solve_reference

__version__ = "0.1.0"

__all__ = [
    "ModeEstimate", "estimate", "fhat", "khat_linear", "khat_riccati",
    "BoundaryNodes", "CurveSpec", "NotStarShapedError", "default_n", "discretize",
    "ComparisonReport", "SweepConfig", "fit_error_scaling", "match_and_score", "solvespectrum",
    "LayerMatrix", "assemble",
    "NtdEigenpair", "NtdSpectrum", "SingularSystemError", "ntd_spectrum_cayley", "ntd_spectrum_direct",
    "select_window",
    "eval_mode", "interior_grid",
    "ReferenceConfig", "ReferenceMode", "find_eigenfrequencies", "solve_reference",
]
