"""Recovery circuit for the two-loss binomial code.

Round one measures the photon number mod 3 (``0`` vs not). If it was ``0``,
round two asks whether the state lies in the code space (no error) or not
(dephasing). Otherwise round two distinguishes ``1 mod 3`` (two losses) from
``2 mod 3`` (one loss). Round three applies the correction unitary for the
syndrome; its ``1`` branch is never taken.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._linalg import complete_columns, dagger
from ..channel_repr import ChannelError
from ..tree_synthesis import AdaptiveCircuit
from .cat import annihilation

# Syndrome bits (first two outcomes) for each correctable error.
SYNDROMES = {"I": "00", "n": "01", "a": "11", "a2": "10"}


@dataclass(frozen=True)
class BinomialCodeSpec:
    n_c: int = 12

    def __post_init__(self):
        if self.n_c < 9:
            raise ChannelError("binomial code needs at least 10 Fock levels (n_c >= 9)")

    @property
    def dim(self) -> int:
        return self.n_c + 1

    def codewords(self) -> tuple[np.ndarray, np.ndarray]:
        up = np.zeros(self.dim, dtype=complex)
        down = np.zeros(self.dim, dtype=complex)
        up[0], up[6] = 0.5, np.sqrt(3) / 2
        down[3], down[9] = np.sqrt(3) / 2, 0.5
        return up, down

    def logical_state(self, c_up: complex, c_down: complex) -> np.ndarray:
        up, down = self.codewords()
        v = c_up * up + c_down * down
        return v / np.linalg.norm(v)

    def errors(self) -> dict[str, np.ndarray]:
        a = annihilation(self.dim)
        return {"I": np.eye(self.dim, dtype=complex), "n": dagger(a) @ a, "a": a, "a2": a @ a}

    def mod3_projector(self, r: int) -> np.ndarray:
        return np.diag((np.arange(self.dim) % 3 == r).astype(complex))

    def code_projector(self) -> np.ndarray:
        return sum(np.outer(w, w.conj()) for w in self.codewords())


def correction_unitary(spec: BinomialCodeSpec, error: np.ndarray) -> np.ndarray:
    """Unitary sending the normalized error states ``E|W_s>`` back to ``|W_s>``.

    The remaining columns map the orthogonal complement of the error states
    onto the complement of the code space, both completed deterministically
    from the standard basis.

    Raises:
        ChannelError: the error states are not orthogonal with equal norms
            (the error is not correctable on this code).
    """
    words = spec.codewords()
    imgs = [error @ w for w in words]
    norms = [np.linalg.norm(v) for v in imgs]
    src = np.column_stack([v / n for v, n in zip(imgs, norms)])
    if abs(norms[0] - norms[1]) > 1e-12 or abs(np.vdot(src[:, 0], src[:, 1])) > 1e-12:
        raise ChannelError("error is not correctable on the binomial code")
    tgt = complete_columns(np.column_stack(words), spec.dim)
    return tgt @ dagger(complete_columns(src, spec.dim))


def binomial_recovery_circuit(spec: BinomialCodeSpec) -> AdaptiveCircuit:
    """Depth-3 syndrome-measure-and-correct circuit."""
    d = spec.dim
    eye = np.eye(d, dtype=complex)
    zero = np.zeros((d, d), dtype=complex)
    p0, p1 = spec.mod3_projector(0), spec.mod3_projector(1)
    pw = spec.code_projector()
    errs = spec.errors()
    # Dephasing leaves part of the state in the code space; only the part that
    # lands outside it (syndrome 01) needs correcting.
    corrections = {
        "00": eye,
        "01": correction_unitary(spec, (eye - pw) @ errs["n"]),
        "11": correction_unitary(spec, errs["a"]),
        "10": correction_unitary(spec, errs["a2"]),
    }
    blocks = {
        "": (p0, eye - p0),
        "0": (pw, eye - pw),
        "1": (p1, eye - p1),
        **{lab: (u, zero) for lab, u in corrections.items()},
    }
    return AdaptiveCircuit.from_blocks(blocks, example="binomial", n_c=spec.n_c)
