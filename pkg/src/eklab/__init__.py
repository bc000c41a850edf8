"""Numerical laboratory for energy conservation in Euler-Korteweg flows.

Submodules
----------
fields        periodic grids, fields, spectral calculus, snapshot I/O
constitutive  energy and capillarity laws, pressure, stress, energy balance
dynamics      RK4 pseudo-spectral solver, split-step NLS, Madelung transform
mollify       space-time mollification and commutator residuals
besov         structure functions, Besov exponents, rough-field generators
harness       scenario configs, pipelines and the ``ek`` command line
"""
from .besov import BesovExponentEstimator, fit_exponent, structure_function, weierstrass_field
from .constitutive import (
    ConstantCapillarity,
    GammaLaw,
    Laws,
    LinearLaw,
    LogLaw,
    QHDCapillarity,
    total_energy,
    weak_energy_residual,
)
from .dynamics import Trajectory, WaveField, madelung, madelung_trajectory, simulate
from .fields import EKState, ScalarField, TorusGrid, VectorField, make_grid, read_snapshot, write_snapshot
from .mollify import Mollifier, MollifierKernel, commutator_fields, weighted_residuals
from .testfunction import TestFunction

__version__ = "0.1.0"

__all__ = [
    "BesovExponentEstimator",
    "fit_exponent",
    "structure_function",
    "weierstrass_field",
    "ConstantCapillarity",
    "GammaLaw",
    "Laws",
    "LinearLaw",
    "LogLaw",
    "QHDCapillarity",
    "total_energy",
    "weak_energy_residual",
    "Trajectory",
    "WaveField",
    "madelung",
    "madelung_trajectory",
    "simulate",
    "EKState",
    "ScalarField",
    "TorusGrid",
    "VectorField",
    "make_grid",
    "read_snapshot",
    "write_snapshot",
    "Mollifier",
    "MollifierKernel",
    "commutator_fields",
    "weighted_residuals",
    "TestFunction",
]
