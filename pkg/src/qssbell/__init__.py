"""Bell-inequality violation and eavesdropping security of GHZ quantum secret sharing."""

from .bell import (
    BellResult,
    MeasurementSettings,
    SeesawOptions,
    chsh_operator,
    classify_violation,
    horodecki_S,
    mk_maximize,
    mk_operator,
    monogamy_pair,
    v_operator_identity,
)
from .infotheory import MeasurementPlan, JointDistribution, joint_distribution, mutual_information, shannon_entropy
from .linalg import BlochVector, DensityMatrix, StateVector, expectation, kron, partial_trace, pauli_op
from .protocol import Scenario, find_threshold, run_protocol, security_bell_table
from .states import AttackParams, attack_qss, attack_two_party, counterexample_state, epr_phi_plus, ghz

__version__ = "0.1.0"

__all__ = [
    "AttackParams",
    "BellResult",
    "BlochVector",
    "DensityMatrix",
    "JointDistribution",
    "MeasurementPlan",
    "MeasurementSettings",
    "Scenario",
    "SeesawOptions",
    "StateVector",
    "attack_qss",
    "attack_two_party",
    "chsh_operator",
    "classify_violation",
    "counterexample_state",
    "epr_phi_plus",
    "expectation",
    "find_threshold",
    "ghz",
    "horodecki_S",
    "joint_distribution",
    "kron",
    "mk_maximize",
    "mk_operator",
    "monogamy_pair",
    "mutual_information",
    "partial_trace",
    "pauli_op",
    "run_protocol",
    "security_bell_table",
    "shannon_entropy",
    "v_operator_identity",
]
