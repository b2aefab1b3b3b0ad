"""Run adaptive circuits on density matrices.

Three execution modes share the same branching semantics: the ancilla starts
in ``|0>`` every round, outcome ``b`` applies block ``b`` of the node chosen by
the record so far, and the state is renormalized by the Born probability.

* exact: enumerate every outcome path and sum the subnormalized branches;
* trajectory: sample one path per run, with reproducible seeding;
* instrument / POVM: keep only the first few outcome bits as the classical
  result and marginalize the rest.
"""

from __future__ import annotations

import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union

import numpy as np

from ._linalg import dagger, hermitize, trace_distance
from .channel_repr import ChannelError, ChannelSpec, DimensionMismatch, Representation, choi_distance
from .tree_synthesis import AdaptiveCircuit

# Branches with Born probability below this are dropped.
BRANCH_CUTOFF = 1e-14
THREADS_ENV = "CHANNEL_FORGE_THREADS"


class NumericalDeadEnd(ChannelError):
    pass


def density_matrix(state: np.ndarray) -> np.ndarray:
    """Accept a ket or a square matrix; kets become projectors."""
    a = np.asarray(state, dtype=complex)
    if a.ndim == 1:
        a = a / np.linalg.norm(a)
        return np.outer(a, a.conj())
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a ket or square matrix, got shape {a.shape}")
    return a


def fidelity_to_pure(rho: np.ndarray, psi: np.ndarray) -> float:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return float(np.real(psi.conj() @ rho @ psi))


def _check_dim(c: AdaptiveCircuit, rho: np.ndarray) -> None:
    if rho.shape != (c.dim, c.dim):
        raise DimensionMismatch(f"state of shape {rho.shape} for a d={c.dim} circuit")


def enumerate_paths(c: AdaptiveCircuit, rho: np.ndarray) -> Iterator[tuple[str, float, np.ndarray]]:
    """Yield ``(bits, probability, subnormalized state)`` for each live leaf.

    Paths whose branch probability drops below ``BRANCH_CUTOFF`` at any round
    are pruned, so the probabilities sum to one only up to that cutoff.
    """
    rho = hermitize(density_matrix(rho))
    _check_dim(c, rho)
    stack = [("", rho)]
    while stack:
        label, r = stack.pop()
        if len(label) == c.depth:
            yield label, float(np.real(np.trace(r))), r
            continue
        for b in "10":
            blk = c.nodes[label].blocks()[int(b)]
            nxt = blk @ r @ dagger(blk)
            if np.real(np.trace(nxt)) >= BRANCH_CUTOFF:
                stack.append((label + b, nxt))


def path_distribution(c: AdaptiveCircuit, rho: np.ndarray) -> dict[str, float]:
    return dict(sorted((bits, p) for bits, p, _ in enumerate_paths(c, rho)))


def apply_channel_exact(c: AdaptiveCircuit, rho: np.ndarray) -> np.ndarray:
    """Sum of ``B rho B^dag`` over every outcome path ``B``.

    Linear in ``rho``, so coherences such as ``|0><2|`` are accepted too.
    """
    r = density_matrix(rho)
    _check_dim(c, r)
    out = sum(k @ r @ dagger(k) for k in c.leaf_kraus.values())
    return hermitize(out) if np.allclose(r, dagger(r), atol=1e-15, rtol=0) else out


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    outcome_bits: str
    probability: float
    final_state: np.ndarray

    def to_dict(self, target: np.ndarray | None = None) -> dict:
        rec: dict = {"bits": self.outcome_bits, "p": self.probability}
        if target is not None:
            rec["fidelity_to"] = fidelity_to_pure(self.final_state, target)
        return rec


def _rng(seed: Union[int, np.random.Generator, np.random.SeedSequence, None]) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for trajectory ``index`` derived from ``seed`` alone."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def run_trajectory(
    c: AdaptiveCircuit,
    rho: np.ndarray,
    seed: Union[int, np.random.Generator, None] = None,
) -> TrajectoryRecord:
    """Sample one outcome path and return the normalized final state.

    Raises:
        NumericalDeadEnd: both outcomes of some round have probability below
            ``BRANCH_CUTOFF``.
    """
    rng = _rng(seed)
    r = hermitize(density_matrix(rho))
    _check_dim(c, r)
    r = r / np.real(np.trace(r))
    bits, prob = "", 1.0
    for _ in range(c.depth):
        node = c.nodes[bits]
        branches = [blk @ r @ dagger(blk) for blk in node.blocks()]
        p = np.array([max(float(np.real(np.trace(x))), 0.0) for x in branches])
        p[p < BRANCH_CUTOFF] = 0.0
        total = p.sum()
        if total == 0.0:
            raise NumericalDeadEnd(f"no live branch after record {bits!r}")
        b = int(rng.random() * total >= p[0])
        if p[b] == 0.0:
            b = 1 - b
        r = hermitize(branches[b] / p[b])
        prob *= p[b] / total
        bits += str(b)
    return TrajectoryRecord(bits, prob, r)


def thread_count() -> int:
    cap = os.environ.get(THREADS_ENV)
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return n


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    state: np.ndarray
    histogram: Mapping[str, int]
    records: list[TrajectoryRecord] = field(repr=False)

    def summary(self, exact: np.ndarray | None = None) -> dict:
        out: dict = {"trajectories": len(self.records), "histogram": dict(self.histogram)}
        if exact is not None:
            out["trace_distance_to_exact"] = trace_distance(self.state, exact)
        return out


def monte_carlo(c: AdaptiveCircuit, rho: np.ndarray, n: int, seed: int = 0) -> EnsembleResult:
    """Average ``n`` sampled trajectories with equal weight.

    Trajectory ``i`` draws from :func:`trajectory_rng` ``(seed, i)``, so the
    result does not depend on how runs are scheduled across threads.
    """
    if n < 1:
        raise ValueError("need at least one trajectory")
    r = hermitize(density_matrix(rho))
    _check_dim(c, r)
    c.leaf_kraus  # noqa: B018 - warm shared caches before threading

    def one(i: int) -> TrajectoryRecord:
        return run_trajectory(c, r, trajectory_rng(seed, i))

    workers = min(thread_count(), n)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            records = list(pool.map(one, range(n)))
    else:
        records = [one(i) for i in range(n)]
    state = sum(rec.final_state for rec in records) / n
    hist = Counter(rec.outcome_bits for rec in records)
    return EnsembleResult(hermitize(state), dict(sorted(hist.items())), records)


@dataclass(frozen=True, eq=False)
class InstrumentOutput:
    """Classical outcome ``mu`` (a bit string) with probability and normalized state."""

    outcomes: Mapping[str, tuple[float, np.ndarray]]

    def probabilities(self) -> dict[str, float]:
        return {mu: p for mu, (p, _) in self.outcomes.items()}

    def average_state(self) -> np.ndarray:
        return sum(p * s for p, s in self.outcomes.values())


def _check_keep(c: AdaptiveCircuit, keep_bits: int) -> None:
    if not 0 <= keep_bits <= c.depth:
        raise ValueError(f"keep_bits must lie in [0, {c.depth}]")


def run_instrument(c: AdaptiveCircuit, rho: np.ndarray, keep_bits: int) -> InstrumentOutput:
    """Group outcome paths by their first ``keep_bits`` bits."""
    _check_keep(c, keep_bits)
    groups: dict[str, np.ndarray] = {}
    for bits, _, r in enumerate_paths(c, rho):
        mu = bits[:keep_bits]
        groups[mu] = groups.get(mu, 0) + r
    outcomes = {}
    for mu in sorted(groups):
        p = float(np.real(np.trace(groups[mu])))
        outcomes[mu] = (p, hermitize(groups[mu] / p))
    return InstrumentOutput(outcomes)


def povm_elements(c: AdaptiveCircuit, keep_bits: int) -> dict[str, np.ndarray]:
    """``Pi_mu = sum K^dag K`` over the leaves sharing the prefix ``mu``."""
    _check_keep(c, keep_bits)
    out: dict[str, np.ndarray] = {}
    for bits, k in c.leaf_kraus.items():
        mu = bits[:keep_bits]
        out[mu] = out.get(mu, 0) + dagger(k) @ k
    return {mu: hermitize(out[mu]) for mu in sorted(out)}


def run_povm(c: AdaptiveCircuit, rho: np.ndarray, keep_bits: int) -> dict[str, float]:
    r = density_matrix(rho)
    _check_dim(c, r)
    return {mu: float(np.real(np.trace(pi @ r))) for mu, pi in povm_elements(c, keep_bits).items()}


def channel_distance(
    a: Union[ChannelSpec, Representation, AdaptiveCircuit],
    b: Union[ChannelSpec, Representation, AdaptiveCircuit],
) -> float:
    """Frobenius distance between Choi matrices."""
    a = a.channel() if isinstance(a, AdaptiveCircuit) else a
    b = b.channel() if isinstance(b, AdaptiveCircuit) else b
    return choi_distance(a, b)
