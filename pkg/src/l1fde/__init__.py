"""L1 time stepping with piecewise-linear finite elements for fractional diffusion.

Covers subdiffusion (Caputo derivative of order alpha in time, Dirichlet
Laplacian in space) and the space-time fractional problem with a
Riemann-Liouville operator of order beta in space, together with
Mittag-Leffler reference solutions and convergence-table reproduction.
"""

from __future__ import annotations

from l1fde.exceptions import DomainError, NumericalError
from l1fde.experiments import ExperimentConfig, reproduce_table, run_experiment
from l1fde.fem1d import (
    Laplacian,
    Mesh,
    RiemannLiouville,
    SpatialDiscretization,
    assemble_mass,
    assemble_stiff_laplace,
    assemble_stiff_rl,
    discretize,
    l2_norm,
    l2_project,
    load_vector,
    make_mesh,
    rl_derivative_hat,
    ritz_project,
)
from l1fde.initial_data import InitialDataSpec
from l1fde.l1stepper import L1Weights, SolutionHistory, TimeGrid, l1_weights, march, solve_scalar_ode
from l1fde.linalg import Tridiagonal, factorize, linear_solve, thomas_solve
from l1fde.reference import (
    ConvergenceReport,
    EigenExpansion,
    empirical_rates,
    error_at,
    exact_nodal,
    exact_subdiffusion,
    self_reference,
    sine_coefficients,
)
from l1fde.specfun import MLParams, gamma_fn, mittag_leffler, polylog, polylog_exp

__version__ = "0.1.0"
