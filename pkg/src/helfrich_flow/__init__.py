"""Gradient flow of the generalised Helfrich energy for closed curves in R^n."""

from .ambient import (
    AffineMap,
    AmbientSpec,
    Constant,
    InverseQuadratic,
    ScalarField,
    operator_norm,
    rotation_map,
    spontaneous,
    validate_affine_assumption,
    validate_properness,
)
from .curve import DiscreteCurve, circle, ellipse, fourier_curve, resample_uniform
from .energy import EnergyReport, GradientField, energy, euler_lagrange, first_variation_fd
from .flow import FlowConfig, FlowState, detect_circle, run, step

__version__ = "0.1.0"

__all__ = [
    "AffineMap", "AmbientSpec", "Constant", "DiscreteCurve", "EnergyReport", "FlowConfig",
    "FlowState", "GradientField", "InverseQuadratic", "ScalarField", "circle", "detect_circle",
    "ellipse", "energy", "euler_lagrange", "first_variation_fd", "fourier_curve", "operator_norm",
    "resample_uniform", "rotation_map", "run", "spontaneous", "step", "validate_affine_assumption",
    "validate_properness",
]
