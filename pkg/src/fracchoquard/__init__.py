"""Spectral lab for ground states of the fractional Choquard equation
``(-Delta)^s u + omega u = (|x|^(alpha-N) * |u|^p) |u|^(p-2) u``."""

from .analysis import (
    Certificate,
    DecayFit,
    MorseData,
    ScalingReport,
    certify,
    estimate_gn_constant,
    fit_decay_exponent,
    make_bubble,
    morse_spectrum,
    pohozaev_obstruction,
    rho_energy_check,
    scaling_report,
)
from .errors import ChoquardError, ValidationError
from .functionals import (
    FunctionalValues,
    first_variation,
    functional_suite,
    hessian_apply,
    nonlinear_term,
)
from .io import read_field, write_field
from .params import ProblemParams, Regime, RegimeTag, classify_regime, validate_params
from .solvers import SolveReport, SolverOptions, Termination, solve_ground_state_ngf, solve_petviashvili
from .spectral import (
    ConvolutionMode,
    Field,
    Grid,
    fractional_laplacian_apply,
    make_grid,
    resolvent_apply,
    riesz_convolve,
    sample,
)
from .symmetry import SymmetryKind, SymmetrySpec, symmetrize

__version__ = "0.1.0"
