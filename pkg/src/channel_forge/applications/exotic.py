"""The partial corner transpose, a channel no Lindbladian can reach."""

from __future__ import annotations

import numpy as np

from ..channel_repr import ChannelSpec, SuperOperator
from ..tree_synthesis import AdaptiveCircuit


def corner_transpose(rho: np.ndarray) -> np.ndarray:
    """``(rho with rho[0, d-1] and rho[d-1, 0] swapped + I Tr rho) / (d + 1)``."""
    d = rho.shape[0]
    out = np.array(rho, dtype=complex)
    out[0, d - 1], out[d - 1, 0] = rho[d - 1, 0], rho[0, d - 1]
    return (out + np.eye(d) * np.trace(rho)) / (d + 1)


def corner_transpose_channel(d: int) -> ChannelSpec:
    if d < 2:
        raise ValueError("corner transpose needs d >= 2")
    t = np.zeros((d * d, d * d), dtype=complex)
    for m in range(d):
        for n in range(d):
            unit = np.zeros((d, d))
            unit[m, n] = 1.0
            t[:, m * d + n] = corner_transpose(unit).reshape(-1)
    return ChannelSpec(SuperOperator(t), label=f"corner_transpose_{d}")


def appendix_c_circuit() -> AdaptiveCircuit:
    """Hand-derived depth-3 circuit for the qutrit corner transpose."""
    s2 = np.sqrt(2.0)
    sq = np.sqrt
    c = 2 / sq(6 + s2)
    blocks = {
        "": (
            np.diag([sq(10 + s2) / 4, sq(2 + 1 / s2) / 2, sq(10 + s2) / 4]),
            np.diag([sq(6 - s2) / 4, sq(2 - 1 / s2) / 2, sq(6 - s2) / 4]),
        ),
        "0": (
            np.diag([sq(29 + 2 * s2) / 7, sq((3 + s2) / 7), sq(29 + 2 * s2) / 7]),
            np.diag([2 / sq(10 + s2), 1 / sq(2 + 1 / s2), 2 / sq(10 + s2)]),
        ),
        "1": (
            np.diag([sq(2 * (6 + s2) / 17), 0.0, sq(2 * (6 + s2) / 17)]),
            np.diag([sq((5 - 2 * s2) / 17), 1.0, sq((5 - 2 * s2) / 17)]),
        ),
        "00": (np.diag([sq((5 + 2 * s2) / 17), 1.0, sq((5 + 2 * s2) / 17)]), np.diag([-c, 0.0, c])),
        "01": (
            np.array([[0, 0, 1], [0, 0, 0], [1, 0, 0]], dtype=float),
            np.array([[0, 0, 0], [0, 0, 0], [0, 1, 0]], dtype=float),
        ),
        "10": (
            np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0]], dtype=float),
            np.array([[0, 0, 0], [1, 0, 0], [0, 0, 0]], dtype=float),
        ),
        "11": (
            np.array([[0, sq((4 + s2) / 7), 0], [0, 0, 0], [0, 0, 0]]),
            np.diag([1.0, -sq((3 - s2) / 7), 1.0]),
        ),
    }
    return AdaptiveCircuit.from_blocks(blocks, example="corner_transpose_hand_built")
