"""Factor tree nodes into the dispersive-cQED gate set.

Each round becomes a system rotation ``V^dag``, a photon-number-selective
entangler (independent ``exp(-i Y_n theta_n / 2)`` rotations between
``|g,n>`` and ``|e,n>``), and a system rotation ``W0`` or ``W1`` chosen by the
ancilla readout. The left column blocks of the resulting ``2d x 2d`` unitary
are ``W0 diag(cos theta/2) V^dag`` and ``W1 diag(sin theta/2) V^dag``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ._linalg import complete_columns, dagger, sorted_svd
from .channel_repr import ChannelError
from .tree_synthesis import AdaptiveCircuit, NotIsometry, TreeNode

NORM_TOL = 1e-8
# Singular values below this are treated as zero when solving for W columns.
SUPPORT_CUTOFF = 1e-12
# Singular values closer than this count as degenerate (flagged in output).
DEGENERACY_TOL = 1e-9


class DecompositionFailure(ChannelError):
    pass


@dataclass(frozen=True, eq=False)
class EntanglerAngles:
    theta: np.ndarray

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=float)
        if np.any(th < 0) or np.any(th > np.pi):
            raise ValueError("entangler angles must lie in [0, pi]")
        th = th.copy()
        th.setflags(write=False)
        object.__setattr__(self, "theta", th)

    @property
    def cos(self) -> np.ndarray:
        return np.cos(self.theta / 2)

    @property
    def sin(self) -> np.ndarray:
        return np.sin(self.theta / 2)

    def unitary(self) -> np.ndarray:
        """``[[C, -S], [S, C]]`` in ancilla (x) system ordering."""
        c, s = np.diag(self.cos), np.diag(self.sin)
        return np.block([[c, -s], [s, c]]).astype(complex)


def angles_from_singulars(s0: np.ndarray, s1: np.ndarray, tol: float = NORM_TOL) -> EntanglerAngles:
    """``theta_n = 2 atan2(s1_n, s0_n)``.

    Raises:
        NotIsometry: if some ``s0_n**2 + s1_n**2`` is not 1 within ``tol`` or an
            entry is negative.
    """
    s0, s1 = np.asarray(s0, dtype=float), np.asarray(s1, dtype=float)
    if np.any(s0 < -tol) or np.any(s1 < -tol):
        raise NotIsometry("singular values must be non-negative")
    norm = s0**2 + s1**2
    if np.max(np.abs(norm - 1.0)) > tol:
        raise NotIsometry(f"s0^2 + s1^2 deviates from 1 by {np.max(np.abs(norm - 1.0)):.3e}")
    return EntanglerAngles(2.0 * np.arctan2(np.clip(s1, 0, None), np.clip(s0, 0, None)))


@dataclass(frozen=True, eq=False)
class CqedRound:
    V: np.ndarray
    angles: EntanglerAngles
    W0: np.ndarray
    W1: np.ndarray
    degenerate: bool = False

    def unitary(self) -> np.ndarray:
        """The full ``2d x 2d`` round unitary ``diag(W0, W1) U_ent diag(V^dag, V^dag)``."""
        z = np.zeros_like(self.W0)
        post = np.block([[self.W0, z], [z, self.W1]])
        pre = np.block([[dagger(self.V), z], [z, dagger(self.V)]])
        return post @ self.angles.unitary() @ pre


def reconstruct_blocks(r: CqedRound) -> tuple[np.ndarray, np.ndarray]:
    vd = dagger(r.V)
    return r.W0 @ np.diag(r.angles.cos) @ vd, r.W1 @ np.diag(r.angles.sin) @ vd


def _solve_w(cols: np.ndarray, s: np.ndarray) -> tuple[np.ndarray, bool]:
    # Columns of ``block @ V`` scaled by 1/s on the support, orthonormalized
    # in order of decreasing s; kernel columns filled by deterministic completion.
    d = cols.shape[0]
    w = np.zeros((d, d), dtype=complex)
    chosen: list[np.ndarray] = []
    filled = np.zeros(d, dtype=bool)
    for k in np.argsort(-s, kind="stable"):
        if s[k] <= SUPPORT_CUTOFF:
            break
        v = cols[:, k] / s[k]
        if chosen:
            q = np.column_stack(chosen)
            v = v - q @ (q.conj().T @ v)
        v = v / np.linalg.norm(v)
        chosen.append(v)
        w[:, k] = v
        filled[k] = True
    completed = not filled.all()
    if completed:
        base = np.column_stack(chosen) if chosen else np.zeros((d, 0), complex)
        full = complete_columns(base, d)
        extra = iter(full[:, len(chosen):].T)
        for k in range(d):
            if not filled[k]:
                w[:, k] = next(extra)
    return w, completed


def decompose_round(node: TreeNode, tol: float = NORM_TOL) -> CqedRound:
    """Find ``V``, angles, ``W0``, ``W1`` reproducing the node's two blocks.

    ``V`` and ``W0`` come from the SVD of ``block0`` (singular values
    descending). The isometry condition then forces the columns of
    ``block1 @ V`` to be orthogonal with norms ``sqrt(1 - s0**2)``, ascending,
    and ``W1`` is read off from them.

    Raises:
        NotIsometry: the node blocks do not form an isometry.
        DecompositionFailure: ``block1`` is not diagonalized by the same
            ``V`` (only possible for non-isometric input).
    """
    b0, b1 = node.blocks()
    resid = node.isometry_residual()
    if resid > tol:
        raise NotIsometry(f"node {node.label!r} isometry residual {resid:.3e}")
    w0, s0, v = sorted_svd(b0)
    cols1 = b1 @ v
    gram = dagger(cols1) @ cols1
    s1 = np.sqrt(np.clip(np.real(np.diag(gram)), 0, None))
    off = gram - np.diag(np.diag(gram))
    if np.linalg.norm(off) > tol:
        raise DecompositionFailure(f"node {node.label!r}: V0 != V1 (off-diagonal {np.linalg.norm(off):.3e})")
    if np.any(np.diff(s1) < -tol):
        raise DecompositionFailure(f"node {node.label!r}: sin block not ascending")
    angles = angles_from_singulars(s0, s1, tol)
    w1, completed = _solve_w(cols1, s1)
    repeated = bool(np.any(np.abs(np.diff(s0)) < DEGENERACY_TOL))
    return CqedRound(v, angles, w0, w1, degenerate=repeated or completed)


@dataclass(frozen=True, eq=False)
class CqedCircuit:
    dim: int
    depth: int
    rounds: Mapping[str, CqedRound]
    meta: Mapping[str, object] = field(default_factory=dict)

    def to_adaptive(self) -> AdaptiveCircuit:
        return AdaptiveCircuit.from_blocks({lab: reconstruct_blocks(r) for lab, r in self.rounds.items()})

    @property
    def degenerate_labels(self) -> list[str]:
        return [lab for lab, r in self.rounds.items() if r.degenerate]


def decompose_circuit(c: AdaptiveCircuit) -> CqedCircuit:
    rounds = {lab: decompose_round(node) for lab, node in c.nodes.items()}
    return CqedCircuit(c.dim, c.depth, rounds)


def max_reconstruction_error(c: AdaptiveCircuit, q: CqedCircuit) -> float:
    worst = 0.0
    for lab, node in c.nodes.items():
        r0, r1 = reconstruct_blocks(q.rounds[lab])
        worst = max(worst, float(np.linalg.norm(np.vstack([r0 - node.block0, r1 - node.block1]))))
    return worst


__all__ = [
    "CqedCircuit",
    "CqedRound",
    "DecompositionFailure",
    "EntanglerAngles",
    "angles_from_singulars",
    "decompose_circuit",
    "decompose_round",
    "max_reconstruction_error",
    "reconstruct_blocks",
]
