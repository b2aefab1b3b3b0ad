"""Cat-state pumping in a truncated oscillator."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import lgamma
from typing import Sequence

import numpy as np

from ..channel_repr import DEFAULT_THRESHOLD, SuperOperator
from ..simulator import thread_count
from .lindblad import LindbladSpec, exp_channel, lindblad_superop


def annihilation(d: int) -> np.ndarray:
    """Truncated ``a`` on Fock states ``0..d-1``."""
    return np.diag(np.sqrt(np.arange(1, d)), 1).astype(complex)


def coherent_state(alpha: complex, d: int) -> np.ndarray:
    """Normalized truncation of ``|alpha>`` to ``d`` Fock levels."""
    n = np.arange(d)
    if alpha == 0:
        v = (n == 0).astype(complex)
    else:
        logs = n * np.log(abs(alpha)) - 0.5 * np.array([lgamma(k + 1) for k in n])
        v = np.exp(logs - logs.max()) * np.exp(1j * np.angle(alpha) * n)
    return v / np.linalg.norm(v)


def cat_state(alphas: Sequence[complex], d: int) -> np.ndarray:
    """Normalized equal-weight superposition of truncated coherent states."""
    v = sum(coherent_state(a, d) for a in alphas)
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class CatCodeSpec:
    alphas: tuple[complex, ...]
    kappa: float = 1.0
    n_c: int = 14

    @property
    def dim(self) -> int:
        return self.n_c + 1

    @property
    def tail_contained(self) -> bool:
        """Heuristic: ``|alpha|^2 + 4|alpha| <= n_c`` for every component."""
        return all(abs(a) ** 2 + 4 * abs(a) <= self.n_c for a in self.alphas)

    @classmethod
    def symmetric(cls, alpha: complex, components: int, **kw) -> "CatCodeSpec":
        """``components`` coherent states evenly spaced on the circle of ``alpha``."""
        phases = np.exp(2j * np.pi * np.arange(components) / components)
        return cls(tuple(complex(alpha * p) for p in phases), **kw)


def cat_jump_operator(spec: CatCodeSpec) -> np.ndarray:
    """``sqrt(kappa) * prod_i (a - alpha_i)``."""
    a = annihilation(spec.dim)
    j = np.sqrt(spec.kappa) * np.eye(spec.dim, dtype=complex)
    for alpha in spec.alphas:
        j = j @ (a - alpha * np.eye(spec.dim))
    return j


def cat_generator(spec: CatCodeSpec) -> SuperOperator:
    return lindblad_superop(LindbladSpec(np.zeros((spec.dim, spec.dim)), [cat_jump_operator(spec)]))


@dataclass(frozen=True)
class RankRow:
    t: float
    rank: int
    magnitudes: tuple[float, ...]
    trace_loss: float


def rank_vs_time(
    spec: CatCodeSpec, times: Sequence[float], threshold: float = DEFAULT_THRESHOLD
) -> list[RankRow]:
    """Kraus rank and operator magnitudes of ``exp(L t)`` on a time grid.

    ``trace_loss`` is the completeness residual of the exponentiated map,
    which monitors truncation leakage.
    """
    g = cat_generator(spec)

    def row(t: float) -> RankRow:
        ch = exp_channel(g, t)
        w = ch.choi.spectrum()
        kept = w[w > threshold]
        d = spec.dim
        comp = np.einsum("imin->mn", ch.choi.matrix.reshape(d, d, d, d)).T
        return RankRow(float(t), int(kept.size), tuple(float(x) for x in kept), float(np.linalg.norm(comp - np.eye(d))))

    times = list(times)
    with ThreadPoolExecutor(max(1, min(thread_count(), len(times)))) as pool:
        return list(pool.map(row, times))


def rank_table_csv(rows: Sequence[RankRow]) -> str:
    """CSV with columns ``t, rank, lambda_1..lambda_k`` (ragged rows padded empty)."""
    width = max((len(r.magnitudes) for r in rows), default=0)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "rank"] + [f"lambda_{i + 1}" for i in range(width)])
    for r in rows:
        w.writerow([repr(r.t), r.rank] + [repr(x) for x in r.magnitudes] + [""] * (width - len(r.magnitudes)))
    return buf.getvalue()
