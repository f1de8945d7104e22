"""Kapustin-Witten and complex Yang-Mills identities on flat periodic lattices."""

from .calculus import (
    CENTRAL2,
    CENTRAL4,
    bianchi_defect,
    complex_curvature,
    covariant_codiff,
    covariant_d,
    curvature,
    hodge_star,
    project_pm,
)
from .convergence import convergence_study, step_halving_study
from .estimators import ChernSimonsFlow, CoulombGauge, KWMinimizer
from .flow import FlowDivergedError, FlowState, flow_diagnostics, flow_rhs, integrate_flow
from .functionals import (
    chern_simons,
    chern_simons_variation,
    decomposition_identity,
    energies,
    topological_pairing,
    yang_mills,
)
from .gauge import GaugeFixingError, apply_gauge, coulomb_gauge_fix, gauge_from_algebra
from .io import read_field, write_field
from .kw import (
    AltFormUndefinedError,
    el_residual,
    estimate_diagnostics,
    kw_alt_check,
    kw_residual,
    q_split,
    weitzenbock_check,
)
from .lattice import (
    AdjointForm,
    Configuration,
    GaugeField,
    GridMismatchError,
    TangentPair,
    TorusGrid,
    random_configuration,
    rough_form,
)
from .moment import kahler_pairing, moment_identity_check, moment_map
from .solver import minimize_kw

__version__ = "0.1.0"

__all__ = [
    "AdjointForm",
    "AltFormUndefinedError",
    "CENTRAL2",
    "CENTRAL4",
    "ChernSimonsFlow",
    "Configuration",
    "CoulombGauge",
    "FlowDivergedError",
    "FlowState",
    "GaugeField",
    "GaugeFixingError",
    "GridMismatchError",
    "KWMinimizer",
    "TangentPair",
    "TorusGrid",
    "apply_gauge",
    "bianchi_defect",
    "chern_simons",
    "chern_simons_variation",
    "complex_curvature",
    "convergence_study",
    "coulomb_gauge_fix",
    "covariant_codiff",
    "covariant_d",
    "curvature",
    "decomposition_identity",
    "el_residual",
    "estimate_diagnostics",
    "energies",
    "flow_diagnostics",
    "flow_rhs",
    "gauge_from_algebra",
    "hodge_star",
    "integrate_flow",
    "kahler_pairing",
    "kw_alt_check",
    "kw_residual",
    "minimize_kw",
    "moment_identity_check",
    "moment_map",
    "project_pm",
    "q_split",
    "random_configuration",
    "read_field",
    "rough_form",
    "step_halving_study",
    "topological_pairing",
    "weitzenbock_check",
    "write_field",
    "yang_mills",
]
