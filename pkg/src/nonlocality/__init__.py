"""Locality, common-cause models and separability for bipartite quantum states."""

from .exceptions import (
    ConsistencyError,
    DomainError,
    HermiticityError,
    NonlocalityError,
    NumericError,
    ShapeError,
    SizeError,
)
from .linalg import (
    hermitian_eigenvalues,
    kron,
    partial_trace,
    partial_transpose,
    validate_density,
)
from .locality import (
    BehaviorTable,
    LhvResult,
    LocalModel,
    Scenario,
    behavior_from_state,
    chsh_max,
    chsh_value,
    enumerate_deterministic_strategies,
    factorization_residual,
    lhv_membership,
    mix_local_model,
    no_signaling_residual,
    sample_local_model,
)
from .quantum import (
    DensityOperator,
    ProjectiveMeasurement,
    SeparableComponents,
    bell_state,
    joint_probabilities,
    random_density,
    reduced_state,
    separable_mixture,
    verify_mixture_equality,
    werner_state,
)
from .separability import (
    PptReport,
    ScanRow,
    ppt_test,
    scan_family,
    verify_separable_decomposition,
    werner_chsh_threshold,
    werner_ppt_threshold,
)

__version__ = "0.1.0"
