"""Discrete and continuum energies of dislocation-wall pile-ups."""

from .continuum import LimitConstants, limit_energy, log_limit_energy, minimize_limit, particular_case_energy
from .discrete_energy import (
    RegimeContext,
    context_at,
    energy_and_gradient,
    log_rescaled_energy,
    total_energy,
    total_gradient,
)
from .exceptions import ConfigError, IndeterminateLimit, ParticularCaseError, SingularConfiguration, Unclassifiable
from .measures import EmpiricalMeasure, GridDensity, QuantileFn, max_density_ratio, w1_distance
from .optimizer import SolveReport, minimize_discrete, project_ordered_box
from .potential import eval_dV, eval_V, integral_V
from .scaling import ParamSequences, PowerLawSeq, RegimeReport, classify
from .study import StudyConfig, StudyResult, run_convergence_study, run_log_study

__version__ = "0.1.0"
