"""Compile quantum channels into measurement-adaptive ancilla circuits."""

from .channel_repr import (
    ChannelError,
    ChannelSpec,
    ChoiMatrix,
    DimensionMismatch,
    KrausSet,
    NotCompletelyPositive,
    SuperOperator,
    ValidationReport,
    channel_determinant,
    choi_distance,
    choi_to_kraus,
    choi_to_superop,
    identity_channel,
    kraus_magnitudes,
    kraus_rank,
    kraus_to_choi,
    kraus_to_superop,
    minimal_kraus,
    superop_to_choi,
    validate_cptp,
)
from .cqed_decomp import CqedCircuit, CqedRound, DecompositionFailure, decompose_circuit, decompose_round
from .simulator import (
    InstrumentOutput,
    NumericalDeadEnd,
    TrajectoryRecord,
    apply_channel_exact,
    channel_distance,
    monte_carlo,
    run_instrument,
    run_povm,
    run_trajectory,
)
from .tree_synthesis import AdaptiveCircuit, NotIsometry, TreeNode, synthesize, verify_circuit

__all__ = [
    "AdaptiveCircuit",
    "ChannelError",
    "ChannelSpec",
    "ChoiMatrix",
    "CqedCircuit",
    "CqedRound",
    "DecompositionFailure",
    "DimensionMismatch",
    "InstrumentOutput",
    "KrausSet",
    "NotCompletelyPositive",
    "NotIsometry",
    "NumericalDeadEnd",
    "SuperOperator",
    "TrajectoryRecord",
    "TreeNode",
    "ValidationReport",
    "apply_channel_exact",
    "channel_determinant",
    "channel_distance",
    "choi_distance",
    "choi_to_kraus",
    "choi_to_superop",
    "decompose_circuit",
    "decompose_round",
    "identity_channel",
    "kraus_magnitudes",
    "kraus_rank",
    "kraus_to_choi",
    "kraus_to_superop",
    "minimal_kraus",
    "monte_carlo",
    "run_instrument",
    "run_povm",
    "run_trajectory",
    "superop_to_choi",
    "synthesize",
    "validate_cptp",
    "verify_circuit",
]
