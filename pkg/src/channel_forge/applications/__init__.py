"""Concrete channels: stabilization, cat pumping, binomial QEC, corner transpose."""

from .binomial import SYNDROMES, BinomialCodeSpec, binomial_recovery_circuit, correction_unitary
from .cat import (
    CatCodeSpec,
    RankRow,
    annihilation,
    cat_generator,
    cat_jump_operator,
    cat_state,
    coherent_state,
    rank_table_csv,
    rank_vs_time,
)
from .exotic import appendix_c_circuit, corner_transpose, corner_transpose_channel
from .lindblad import InvalidGenerator, LindbladSpec, NotRelaxing, exp_channel, lindblad_superop, steady_channel
from .stabilize import init_channel

__all__ = [
    "SYNDROMES",
    "BinomialCodeSpec",
    "CatCodeSpec",
    "InvalidGenerator",
    "LindbladSpec",
    "NotRelaxing",
    "RankRow",
    "annihilation",
    "appendix_c_circuit",
    "binomial_recovery_circuit",
    "cat_generator",
    "cat_jump_operator",
    "cat_state",
    "coherent_state",
    "correction_unitary",
    "corner_transpose",
    "corner_transpose_channel",
    "exp_channel",
    "init_channel",
    "lindblad_superop",
    "rank_table_csv",
    "rank_vs_time",
    "steady_channel",
]
