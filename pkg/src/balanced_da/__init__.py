"""Unsupervised domain adaptation that balances marginal and conditional MMD (BDA, W-BDA)."""
from ._backend import BACKEND
from .bda import AdaptModel, fit, special_case_jda, special_case_tca, sweep_mu
from .classifier import NnModel, accuracy, knn_predict
from .core import AdaptConfig, LabeledDomain, RunReport, UnlabeledDomain, validate_pair
from .data_io import generate_shift, synthetic_task
from .eigsolver import Projection, solve_projection
from .methods import REGISTRY, run_method

__all__ = [
    "BACKEND",
    "REGISTRY",
    "AdaptConfig",
    "AdaptModel",
    "LabeledDomain",
    "NnModel",
    "Projection",
    "RunReport",
    "UnlabeledDomain",
    "accuracy",
    "fit",
    "generate_shift",
    "knn_predict",
    "run_method",
    "solve_projection",
    "special_case_jda",
    "special_case_tca",
    "sweep_mu",
    "synthetic_task",
    "validate_pair",
]

__version__ = "0.1.0"
