"""Finite-difference simulation of anisotropic p-Laplace SPDEs with Wiener and Lévy noise."""

from .mesh import FaceField, Grid, GridFunction, build_grid
from .model import ModelSpec, preset, quasilinear_scenario
from .noise import NoisePath, sample_path
from .stepper import SolverConfig, Trajectory, integrate

__version__ = "0.1.0"

__all__ = [
    "FaceField", "Grid", "GridFunction", "build_grid", "ModelSpec", "preset",
    "quasilinear_scenario", "NoisePath", "sample_path", "SolverConfig", "Trajectory", "integrate",
]
