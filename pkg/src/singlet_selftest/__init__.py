"""Self-testing of the two-qubit maximally entangled state from (2,2,2) correlations."""

__version__ = "0.1.0"

from .errors import (
    DimensionMismatch,
    EmptyGrid,
    NotCanonical,
    NotSelfTesting,
    SelfTestError,
    SingularDenominator,
    TooDegenerate,
    UnhousedMoment,
    UnsupportedControl,
    ZeroCorrelator,
)
from .geometry import (
    AnglePoint,
    Classification,
    CorrelationPoint,
    Relabeling,
    all_relabelings,
    angles_from_correlations,
    canonical_angles,
    canonicalize,
    check_selftest_condition,
    chsh_max,
    classify,
    mayers_yao_point,
    nonlocality_witness,
)
from .games import GameVector, classical_value, game_coefficients, quantum_value, verify_maximizer
from .realization import (
    ControlSet,
    QubitRealization,
    build_realization,
    control_operators,
    verify_selftest_relations,
)
from .simulator import rho_swap, rho_swap_fidelity, rotated_target


__all__ = [
    "AnglePoint",
    "Classification",
    "ControlSet",
    "CorrelationPoint",
    "DimensionMismatch",
    "EmptyGrid",
    "GameVector",
    "NotCanonical",
    "NotSelfTesting",
    "QubitRealization",
    "Relabeling",
    "SelfTestError",
    "SingularDenominator",
    "TooDegenerate",
    "UnhousedMoment",
    "UnsupportedControl",
    "ZeroCorrelator",
    "all_relabelings",
    "angles_from_correlations",
    "build_realization",
    "canonical_angles",
    "canonicalize",
    "check_selftest_condition",
    "chsh_max",
    "classical_value",
    "classify",
    "control_operators",
    "game_coefficients",
    "mayers_yao_point",
    "nonlocality_witness",
    "quantum_value",
    "rho_swap",
    "rho_swap_fidelity",
    "rotated_target",
    "verify_maximizer",
    "verify_selftest_relations",
]
