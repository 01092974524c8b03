"""Shock propagation on planar filtered networks.

Correlation structure of a multivariate panel is filtered into a planar
graph (PMFG or PCPG); the graph's missing edges become zero restrictions
on the impact matrix of a B-type structural VAR, whose impulse responses
trace a shock from any node across the network and over time.
"""

__version__ = "0.1.0"

from .assoc import (
    CorrelationMatrix,
    InfluenceMatrix,
    influence_from_correlation,
    influence_matrix,
    partial_correlation,
    pearson_matrix,
)
from .optimize import bfgs_minimize, finite_difference_gradient, nelder_mead_minimize
from .panel import (
    GarchFit,
    TimeSeriesPanel,
    garch11_fit,
    hp_cycle,
    hp_filter,
    load_panel,
    log_returns,
    standardize,
    write_panel,
)
from .planar import FilteredGraph, IdentificationReport, identification_check, mst, pcpg, pmfg
from .planarity import is_planar
from .svar import (
    IrfResult,
    RestrictionMask,
    SvarModel,
    cholesky_orthogonalize,
    estimate_svar_multistart,
    restriction_mask,
    shock_trace,
    structural_irf,
    svar_loglik,
)
from .synthetic import SyntheticSpec, generate_synthetic
from .var import VarModel, check_stability, fit_var, select_lag_bic, wold_coefficients

__all__ = [
    "__version__",
    "CorrelationMatrix",
    "InfluenceMatrix",
    "influence_from_correlation",
    "influence_matrix",
    "partial_correlation",
    "pearson_matrix",
    "bfgs_minimize",
    "finite_difference_gradient",
    "nelder_mead_minimize",
    "GarchFit",
    "TimeSeriesPanel",
    "garch11_fit",
    "hp_cycle",
    "hp_filter",
    "load_panel",
    "log_returns",
    "standardize",
    "write_panel",
    "FilteredGraph",
    "IdentificationReport",
    "identification_check",
    "mst",
    "pcpg",
    "pmfg",
    "is_planar",
    "IrfResult",
    "RestrictionMask",
    "SvarModel",
    "cholesky_orthogonalize",
    "estimate_svar_multistart",
    "restriction_mask",
    "shock_trace",
    "structural_irf",
    "svar_loglik",
    "SyntheticSpec",
    "generate_synthetic",
    "VarModel",
    "check_stability",
    "fit_var",
    "select_lag_bic",
    "wold_coefficients",
]
