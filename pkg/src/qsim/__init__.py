"""qsim: exact simulation of small quantum systems extended with
non-complete, nonlinear, non-Born-rule and constant/post-selection
primitives, the signaling protocols they enable, search/counting gadgets,
and a six-mode two-photon interference model."""

__version__ = "0.1.0"

from .core import (
    AnnihilationError,
    Completeness,
    DensityOperator,
    DimensionMismatchError,
    Ensemble,
    OperatorSet,
    PureState,
    apply_channel,
    apply_operator,
    check_completeness,
    holevo_chi,
    partial_trace,
    reduced_density,
    trace_distance,
    von_neumann_entropy,
)
from .gates import (
    GateSpec,
    MeasurementOutcome,
    NonlinearGateDomainError,
    ZeroAmplitudeError,
    apply_nonlinear_and,
    apply_nonlinear_or,
    constant_gate,
    constant_q2,
    constant_q3,
    deleter_channel,
    g_gate,
    measure_with_renorm,
    p_norm_measure,
    post_select,
)

__all__ = [name for name in dir() if not name.startswith("_")]
