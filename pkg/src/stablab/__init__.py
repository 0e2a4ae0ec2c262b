"""Stability-based regret analysis for online learners."""

from .core import (
    Dataset,
    DecompositionReport,
    InvalidDataPoint,
    LossFunctional,
    RegretLedger,
    StablabError,
    UnsupportedObjective,
    decompose_regret,
    empirical_risk,
    run_online,
)
from .kernels import BACKEND
from .problems import make_problem

__all__ = [
    "BACKEND",
    "Dataset",
    "DecompositionReport",
    "InvalidDataPoint",
    "LossFunctional",
    "RegretLedger",
    "StablabError",
    "UnsupportedObjective",
    "decompose_regret",
    "empirical_risk",
    "make_problem",
    "run_online",
]
__version__ = "0.1.0"
