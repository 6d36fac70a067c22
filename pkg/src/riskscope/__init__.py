"""Regression, feature selection and 2-D embedding toolkit for employee risk tables."""

from .dataset import Dataset, Schema, generate_synthetic, load_csv, standardize, train_test_split
from .exceptions import RiskscopeError
from .metrics import EvalResult, evaluate
from .pipeline import PipelineConfig, PipelineReport, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "Schema",
    "generate_synthetic",
    "load_csv",
    "standardize",
    "train_test_split",
    "RiskscopeError",
    "EvalResult",
    "evaluate",
    "PipelineConfig",
    "PipelineReport",
    "run_pipeline",
]
