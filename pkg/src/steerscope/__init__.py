"""Two-qubit CFFW steering: closed-form criterion, numeric oracle, monogamy."""

__version__ = "0.1.0"

from .matcore import (
    dagger,
    hermitian_eigensystem,
    hermitian_eigenvalues,
    kron,
    matmul,
    partial_trace,
    sym3_eigensystem,
    trace,
)
from .monogamy import MonogamyReport, monogamy_check, monogamy_scan, reduced_pair, trace_formula
from .optimizer import OptimizationSettings, grid_refine, maximize_cffw_numeric
from .states import (
    BlochDecomposition,
    EnsembleSpec,
    StateValidationError,
    ThreeQubitState,
    TwoQubitState,
    compose,
    decompose,
    named_state,
    sample_ensemble,
    validate,
    werner,
)
from .steering import (
    CffwFrame,
    Direction,
    MeasurementConfiguration,
    SteeringCriterionResult,
    cffw_value,
    correlation_expectation,
    horodecki_M,
    is_two_way_symmetric,
    optimal_measurements,
    steering_criterion,
)
