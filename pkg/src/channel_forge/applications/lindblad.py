"""Time-independent Lindblad generators and the channels they generate."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from ..channel_repr import ChannelError, ChannelSpec, SuperOperator, validate_cptp
from .._linalg import dagger, hermitize

CPTP_TOL = 1e-8
# Generator eigenvalues with modulus below this span the stationary subspace.
NULL_TOL = 1e-8


class InvalidGenerator(ChannelError):
    pass


class NotRelaxing(ChannelError):
    pass


@dataclass(frozen=True, eq=False)
class LindbladSpec:
    """``L(rho) = -i[H, rho] + sum_nm h_nm (L_n rho L_m^dag - {L_m^dag L_n, rho}/2)``.

    ``coeffs`` defaults to the identity (independent jumps).
    """

    H: np.ndarray
    jumps: Sequence[np.ndarray] = ()
    coeffs: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return int(np.shape(self.H)[0])

    def coefficient_matrix(self) -> np.ndarray:
        n = len(self.jumps)
        return np.eye(n, dtype=complex) if self.coeffs is None else np.asarray(self.coeffs, dtype=complex)


def lindblad_superop(s: LindbladSpec, tol: float = 1e-10) -> SuperOperator:
    """Row-stacked generator matrix.

    Raises:
        InvalidGenerator: ``H`` not Hermitian or ``coeffs`` not Hermitian PSD.
    """
    d = s.dim
    h_sys = np.asarray(s.H, dtype=complex)
    if np.linalg.norm(h_sys - dagger(h_sys)) > tol:
        raise InvalidGenerator("Hamiltonian is not Hermitian")
    h = s.coefficient_matrix()
    if h.shape != (len(s.jumps), len(s.jumps)):
        raise InvalidGenerator(f"coefficient matrix shape {h.shape} for {len(s.jumps)} jumps")
    if h.size and (np.linalg.norm(h - dagger(h)) > tol or np.linalg.eigvalsh(hermitize(h))[0] < -tol):
        raise InvalidGenerator("coefficient matrix is not Hermitian PSD")
    eye = np.eye(d)
    g = -1j * (np.kron(h_sys, eye) - np.kron(eye, h_sys.T))
    ops = [np.asarray(j, dtype=complex) for j in s.jumps]
    for n, ln in enumerate(ops):
        for m, lm in enumerate(ops):
            if h[n, m] == 0:
                continue
            prod = dagger(lm) @ ln
            g += h[n, m] * (np.kron(ln, lm.conj()) - 0.5 * np.kron(prod, eye) - 0.5 * np.kron(eye, prod.T))
    return SuperOperator(g)


def _checked(t_mat: np.ndarray, label: str, meta: dict) -> ChannelSpec:
    spec = ChannelSpec(SuperOperator(t_mat), label=label, meta=meta)
    report = validate_cptp(spec, CPTP_TOL)
    if not report.passed:
        raise ChannelError(f"{label} failed CPTP validation: {report.to_dict()}")
    return spec


def exp_channel(g: SuperOperator, t: float) -> ChannelSpec:
    """``exp(g t)`` as a validated channel."""
    if t < 0:
        raise ValueError("time must be non-negative")
    return _checked(scipy.linalg.expm(np.asarray(g.matrix) * t), f"exp(L*{t!r})", {"t": t})


def steady_channel(g: SuperOperator, null_tol: float = NULL_TOL) -> ChannelSpec:
    """The ``t -> infinity`` limit of ``exp(g t)``.

    This is the spectral projector of ``g`` onto its null space along the
    decaying modes. A sorted Schur form puts the null block first; solving a
    Sylvester equation block-diagonalizes it and yields the projector without
    diagonalizing ``g``.

    Raises:
        NotRelaxing: some mode outside the null space does not decay, or
            there is no null space at all.
    """
    a = np.asarray(g.matrix, dtype=complex)
    n = a.shape[0]
    tt, z, k = scipy.linalg.schur(a, output="complex", sort=lambda x: abs(x) < null_tol)
    ev = np.diag(tt)
    if k == 0:
        raise NotRelaxing("generator has no stationary subspace")
    rest = ev[k:]
    if rest.size and np.max(rest.real) >= -null_tol:
        raise NotRelaxing(f"non-decaying mode with eigenvalue {rest[np.argmax(rest.real)]:.3e}")
    t11, t12, t22 = tt[:k, :k], tt[:k, k:], tt[k:, k:]
    y = scipy.linalg.solve_sylvester(t11, -t22, t12) if rest.size else np.zeros((k, 0))
    block = np.zeros((n, n), dtype=complex)
    block[:k, :k] = np.eye(k)
    block[:k, k:] = y
    proj = z @ block @ dagger(z)
    meta = {
        "null_dim": int(k),
        "gap": float(-np.max(rest.real)) if rest.size else float("inf"),
        "idempotence_residual": float(np.linalg.norm(proj @ proj - proj)),
        "stationarity_residual": float(np.linalg.norm(a @ proj)),
    }
    return _checked(proj, "steady", meta)
