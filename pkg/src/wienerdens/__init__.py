"""Nonparametric estimation of Wiener densities of functional data
contaminated by scaled Wiener processes."""

__version__ = "0.1.0"

from .errors import CapacityError, NumericalError, ValidationError, WienerDensError
from .funcdata import (
    Grid,
    ModelSpec,
    PrivacyBudget,
    min_privacy_sigma,
    premask,
    simulate_sample,
    simulate_wiener,
    substream,
)
from .projection import (
    CosineBasis,
    EstimatedBasis,
    SineBasis,
    coefficient_matrix,
    estimate_basis,
    ito_coefficient,
    mhat,
)
from .hermite import enumerate_simplex, hermite_eval, hermite_table, tensor_eval
from .density import (
    DensityEstimate,
    DNEstimate,
    eval_dm,
    eval_dm_fallback,
    eval_dn,
    eval_dn_fallback,
    fit_dm,
    fit_dn,
)
from .selection import CvGrid, cv_value, select, select_dn, theoretical_mesh, theoretical_params
from .oracle import FiniteMixture, PointMass, SimModel, sieve_density, squared_error_summary, true_density
from .classify import TrainConfig, classify, train

__all__ = [
    "__version__",
    "WienerDensError", "ValidationError", "CapacityError", "NumericalError",
    "Grid", "ModelSpec", "PrivacyBudget", "min_privacy_sigma", "premask",
    "simulate_sample", "simulate_wiener", "substream",
    "SineBasis", "CosineBasis", "EstimatedBasis", "coefficient_matrix", "estimate_basis",
    "ito_coefficient", "mhat",
    "enumerate_simplex", "hermite_eval", "hermite_table", "tensor_eval",
    "DensityEstimate", "DNEstimate", "fit_dm", "eval_dm", "eval_dm_fallback",
    "fit_dn", "eval_dn", "eval_dn_fallback",
    "CvGrid", "cv_value", "select", "select_dn", "theoretical_params", "theoretical_mesh",
    "FiniteMixture", "PointMass", "SimModel", "true_density", "sieve_density",
    "squared_error_summary",
    "TrainConfig", "train", "classify",
]
