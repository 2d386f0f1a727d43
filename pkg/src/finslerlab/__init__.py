"""Numerical toolkit for the F_{t,k} family of complex Finsler metrics on
products of constant-curvature model factors."""
from .errors import (BoundaryExitError, ConfigError, DomainError, FinslerError, InvalidInputError,
                     SingularTensorError, SingularUpdateError, ZeroSectionError)
from .factors import FactorKind, FactorMetric, bergman_ball, euclidean, fubini_study, poincare_disk
from .product_metric import FinslerMetric, FtkMetric, MetricParams, ProductManifold
from .report import CheckReport

__version__ = "0.1.0"

__all__ = [
    "BoundaryExitError", "CheckReport", "ConfigError", "DomainError", "FactorKind", "FactorMetric",
    "FinslerError", "FinslerMetric", "FtkMetric", "InvalidInputError", "MetricParams",
    "ProductManifold", "SingularTensorError", "SingularUpdateError", "ZeroSectionError",
    "bergman_ball", "euclidean", "fubini_study", "poincare_disk",
]
