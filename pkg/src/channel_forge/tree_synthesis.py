"""Compile a Kraus set into a binary tree of ancilla-conditioned unitaries.

A channel of Kraus rank ``N`` becomes ``L = ceil(log2 N)`` rounds. Round
``l`` applies a ``2d x 2d`` unitary chosen by the measurement record
``b1..bl``; only its left column blocks ``<0|U|0>`` and ``<1|U|0>`` matter
because the ancilla is always prepared in ``|0>``. Node labels are bit
strings (root ``""``); leaf ``b1..bL`` carries Kraus operator number
``int(b1..bL, 2)`` of the zero-padded set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

import numpy as np

from ._linalg import complete_columns, dagger, sorted_right_singular, sorted_svd
from .channel_repr import ChannelError, ChannelSpec, KrausSet, choi_distance

# Branch-sum eigenvalues (squared singular values) at or below this are
# outside the support when forming pseudo-inverses.
PINV_CUTOFF = 1e-12
ISOMETRY_TOL = 1e-8

_SQRT_HALF = 1.0 / np.sqrt(2.0)


class SynthesisError(ChannelError):
    pass


class NotIsometry(ChannelError):
    pass


def depth_for(n: int) -> int:
    """Number of rounds for ``n`` Kraus operators (at least one)."""
    if n < 1:
        raise SynthesisError("empty Kraus set")
    return max(1, (n - 1).bit_length())


def labels_at(level: int) -> list[str]:
    return [format(i, f"0{level}b") if level else "" for i in range(2**level)]


def pad_kraus(k: KrausSet) -> KrausSet:
    """Append zero operators up to ``2**depth_for(N)`` entries."""
    depth = depth_for(len(k))
    zeros = [np.zeros((k.dim, k.dim), dtype=complex)] * (2**depth - len(k))
    return KrausSet(list(k.ops) + zeros)


@dataclass(frozen=True, eq=False)
class NodeScaffold:
    """Spectral data of the branch sum below one tree node."""

    label: str
    V: np.ndarray
    D: np.ndarray
    D_inv: np.ndarray
    P: np.ndarray
    P_perp: np.ndarray

    @cached_property
    def Q(self) -> np.ndarray:
        return self.V @ np.diag(self.P_perp) @ dagger(self.V)

    @cached_property
    def M(self) -> np.ndarray:
        return self.V @ np.diag(self.D) @ dagger(self.V)

    @cached_property
    def M_plus(self) -> np.ndarray:
        return self.V @ np.diag(self.D_inv) @ dagger(self.V)


def _root_scaffold(d: int) -> NodeScaffold:
    one = np.ones(d)
    return NodeScaffold("", np.eye(d, dtype=complex), one, one, one, np.zeros(d))


def _branch_ops(label: str, padded: KrausSet) -> tuple[np.ndarray, ...]:
    depth = depth_for(len(padded))
    lo = int(label, 2) << (depth - len(label)) if label else 0
    return padded.ops[lo : lo + (1 << (depth - len(label)))]


def branch_sum(label: str, padded: KrausSet) -> np.ndarray:
    """``sum K^dag K`` over the leaves whose label starts with ``label``."""
    return sum(dagger(k) @ k for k in _branch_ops(label, padded))


def node_scaffold(label: str, padded: KrausSet) -> NodeScaffold:
    """Diagonalize the branch sum ``V D^2 V^dag`` below ``label``.

    ``V`` and ``D`` are read off the SVD of the branch's Kraus operators
    stacked vertically, which keeps small ``D`` entries accurate. The root is
    fixed to ``V = D = P = I`` and ``P_perp = 0``.
    """
    depth = depth_for(len(padded))
    if len(label) >= depth:
        raise SynthesisError(f"label {label!r} is a leaf, not an internal node")
    if not label:
        return _root_scaffold(padded.dim)
    s, v = sorted_right_singular(np.vstack(_branch_ops(label, padded)))
    w = s**2
    support = w > PINV_CUTOFF
    d = np.where(support, s, 0.0)
    d_inv = np.where(support, 1.0 / np.where(support, d, 1.0), 0.0)
    p = support.astype(float)
    return NodeScaffold(label, v, d, d_inv, p, 1.0 - p)


def internal_block(parent: NodeScaffold, child: NodeScaffold) -> np.ndarray:
    return child.M @ parent.M_plus + _SQRT_HALF * parent.Q


def leaf_block(parent: NodeScaffold, leaf_label: str, padded: KrausSet) -> np.ndarray:
    k = padded[int(leaf_label, 2)]
    if not np.any(k):
        w = v = np.eye(padded.dim, dtype=complex)
    else:
        w, _, v = sorted_svd(k)
    return k @ parent.M_plus + _SQRT_HALF * w @ dagger(v) @ parent.Q


def isometrize(block0: np.ndarray, block1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Replace the stacked blocks by the nearest isometry (polar factor).

    Kraus operators whose weights sit near the support cutoff can leave a
    node a few ulps-over-weight away from isometric; the correction acts only
    on those low-weight directions, so leaf products barely move.
    """
    d = block0.shape[0]
    u, _, vh = np.linalg.svd(np.vstack([block0, block1]), full_matrices=False)
    y = u @ vh
    return y[:d], y[d:]


def complete_unitary(block0: np.ndarray, block1: np.ndarray, tol: float = ISOMETRY_TOL) -> np.ndarray:
    """Embed the stacked ``2d x d`` isometry as the left half of a unitary.

    Raises:
        NotIsometry: if ``block0^dag block0 + block1^dag block1`` is further
            than ``tol`` (Frobenius) from the identity.
    """
    x = np.vstack([block0, block1]).astype(complex)
    resid = np.linalg.norm(dagger(x) @ x - np.eye(x.shape[1]))
    if resid > tol:
        raise NotIsometry(f"isometry residual {resid:.3e}")
    return complete_columns(x)


@dataclass(frozen=True, eq=False)
class TreeNode:
    label: str
    block0: np.ndarray
    block1: np.ndarray

    def blocks(self) -> tuple[np.ndarray, np.ndarray]:
        return self.block0, self.block1

    def isometry_residual(self) -> float:
        s = dagger(self.block0) @ self.block0 + dagger(self.block1) @ self.block1
        return float(np.linalg.norm(s - np.eye(s.shape[0])))

    @cached_property
    def full_unitary(self) -> np.ndarray:
        return complete_unitary(self.block0, self.block1)


@dataclass(frozen=True, eq=False)
class AdaptiveCircuit:
    """Depth-``L`` tree of conditioned rounds over a ``d``-level system."""

    dim: int
    depth: int
    nodes: Mapping[str, TreeNode]
    meta: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        want = {lab for lvl in range(self.depth) for lab in labels_at(lvl)}
        if set(self.nodes) != want:
            raise SynthesisError(f"circuit of depth {self.depth} needs nodes {sorted(want)}")

    @classmethod
    def from_blocks(cls, blocks: Mapping[str, tuple[np.ndarray, np.ndarray]], **meta) -> "AdaptiveCircuit":
        depth = max(len(lab) for lab in blocks) + 1
        d = next(iter(blocks.values()))[0].shape[0]
        nodes = {
            lab: TreeNode(lab, np.asarray(b0, dtype=complex), np.asarray(b1, dtype=complex))
            for lab, (b0, b1) in blocks.items()
        }
        return cls(d, depth, nodes, meta)

    def node(self, label: str) -> TreeNode:
        return self.nodes[label]

    def path_operator(self, bits: str) -> np.ndarray:
        """Ordered block product along ``bits`` (any length up to ``depth``)."""
        op = np.eye(self.dim, dtype=complex)
        for l, b in enumerate(bits):
            op = self.nodes[bits[:l]].blocks()[int(b)] @ op
        return op

    @cached_property
    def leaf_kraus(self) -> dict[str, np.ndarray]:
        return {lab: self.path_operator(lab) for lab in labels_at(self.depth)}

    def kraus_set(self) -> KrausSet:
        return KrausSet(list(self.leaf_kraus.values()))

    def channel(self) -> ChannelSpec:
        return ChannelSpec(self.kraus_set(), label="circuit")


def synthesize(k: KrausSet) -> AdaptiveCircuit:
    """Build the adaptive circuit whose leaves reproduce ``k`` exactly.

    ``k`` should be minimal (see :func:`channels.minimal_kraus`); a single
    operator is padded with a zero partner so every circuit has one round.
    """
    padded = pad_kraus(k)
    depth = depth_for(len(k))
    scaffolds = {"": _root_scaffold(k.dim)}
    for level in range(1, depth):
        for lab in labels_at(level):
            scaffolds[lab] = node_scaffold(lab, padded)
    nodes = {}
    for level in range(depth):
        for lab in labels_at(level):
            parent = scaffolds[lab]
            if level == depth - 1:
                b0, b1 = (leaf_block(parent, lab + b, padded) for b in "01")
            else:
                b0, b1 = (internal_block(parent, scaffolds[lab + b]) for b in "01")
            nodes[lab] = TreeNode(lab, *isometrize(b0, b1))
    return AdaptiveCircuit(k.dim, depth, nodes, {"kraus_count": len(k)})


@dataclass(frozen=True)
class VerificationReport:
    node_residuals: dict[str, float]
    leaf_residuals: dict[str, float]
    choi_distance: float
    node_tol: float = 1e-9
    leaf_tol: float = 1e-9
    choi_tol: float = 1e-8

    @property
    def failed_nodes(self) -> list[str]:
        return [lab for lab, r in self.node_residuals.items() if r >= self.node_tol]

    @property
    def failed_leaves(self) -> list[str]:
        return [lab for lab, r in self.leaf_residuals.items() if r >= self.leaf_tol]

    @property
    def max_node_residual(self) -> float:
        return max(self.node_residuals.values())

    @property
    def max_leaf_residual(self) -> float:
        return max(self.leaf_residuals.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return not self.failed_nodes and not self.failed_leaves and self.choi_distance < self.choi_tol

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_node_residual": self.max_node_residual,
            "max_leaf_residual": self.max_leaf_residual,
            "choi_distance": self.choi_distance,
            "failed_nodes": self.failed_nodes,
            "failed_leaves": self.failed_leaves,
            "node_residuals": self.node_residuals,
            "leaf_residuals": self.leaf_residuals,
        }


def verify_circuit(
    c: AdaptiveCircuit,
    target: KrausSet | ChannelSpec,
    *,
    exact_leaves: bool = True,
    node_tol: float = 1e-9,
    leaf_tol: float = 1e-9,
    choi_tol: float = 1e-8,
) -> VerificationReport:
    """Check a circuit against the channel it is meant to implement.

    Always reports the per-node isometry residual and the Choi distance
    between the circuit's leaf operators and ``target``. With
    ``exact_leaves`` (and a Kraus-set target) each leaf product is also
    compared with the padded target operator of the same label, which only
    makes sense for circuits synthesized from that very set. Hand-built
    circuits realize some other Kraus decomposition of the same channel and
    should be checked with ``exact_leaves=False``.
    """
    node_res = {lab: n.isometry_residual() for lab, n in c.nodes.items()}
    leaf_res: dict[str, float] = {}
    if exact_leaves and isinstance(target, KrausSet):
        padded = pad_kraus(target)
        for lab, op in c.leaf_kraus.items():
            i = int(lab, 2)
            ref = padded[i] if i < len(padded) else np.zeros_like(op)
            leaf_res[lab] = float(np.linalg.norm(op - ref))
        if len(padded) > 2**c.depth:
            leaf_res["<missing>"] = float(np.linalg.norm(padded[2**c.depth:]))
    dist = choi_distance(c.kraus_set(), target)
    return VerificationReport(node_res, leaf_res, dist, node_tol, leaf_tol, choi_tol)


def projection_monotonicity(padded: KrausSet) -> float:
    """Smallest eigenvalue of ``Q_child - Q_parent`` over all parent/child pairs.

    Non-negative (up to round-off) whenever the kernel of the branch sum grows
    toward the leaves, which the construction relies on.
    """
    depth = depth_for(len(padded))
    scaffolds = {"": _root_scaffold(padded.dim)}
    worst = np.inf
    for level in range(1, depth):
        for lab in labels_at(level):
            scaffolds[lab] = node_scaffold(lab, padded)
            diff = scaffolds[lab].Q - scaffolds[lab[:-1]].Q
            worst = min(worst, float(np.linalg.eigvalsh(0.5 * (diff + dagger(diff)))[0]))
    return worst
