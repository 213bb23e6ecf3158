"""Spectral fractional Laplacian Pohozaev identity: verification toolkit.

Dirichlet eigenbases on intervals, rectangles, disks and grid masks; the
spectral fractional Laplacian acting on their span; the fractional Pohozaev
form as a Schur product of a transition matrix and the classical Pohozaev
matrix; positivity certificates; and semilinear solvers with non-existence
probes.
"""

from .domains import Disk, DomainError, GridMask, Interval, Rectangle, load_grid_mask
from .eigenbasis import (EigenPair, EigenSolverError, QuadratureError, SpectralBasis, disk_basis,
                         grid_basis, interval_basis, make_basis, radial_moment_matrix, rectangle_basis,
                         rotate_degenerate_groups, star_shape_margin)
from .pohozaev import (PohozaevQ1, PsdCertificate, TransitionP, bochner_closed_form, bochner_kernel,
                       bochner_transform, bochner_transform_check, identity_residual, matrices, psd_certify,
                       q1_matrix, qs_direct, qs_schur, qs_tilde, transition_entry, transition_matrix)
from .semilinear import (Nonlinearity, ProbePreconditionError, ProbeReport, SolveReport, critical_exponent,
                         criticality, galerkin_residual, newton_solve, nonexistence_probe,
                         pohozaev_functional, power_pohozaev_coefficient, solve_nontrivial)
from .sfl import (ConvergenceError, SpectralFunction, analyze, apply_sfl, sfl_energy, solve_linear,
                  subordination_check, synthesize)

__all__ = [name for name in dir() if not name.startswith("_")]
