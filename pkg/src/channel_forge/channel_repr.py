"""Kraus, superoperator and Choi representations of CPTP maps.

Vectorization is row-stacking throughout: ``vec(rho)[i*d + j] = rho[i, j]``.
With that convention the superoperator of a Kraus set is ``sum_k K (x) K*``
and the Choi matrix is the index reshuffle ``M[(i,m),(j,n)] = T[(i,j),(m,n)]``,
equivalently ``M = sum_k vec(K) vec(K)^dag``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence, Union

import numpy as np

from ._linalg import dagger, fix_phase, hermitize, sorted_eigh

#: Eigenvalues / Kraus magnitudes at or below this are treated as zero.
DEFAULT_THRESHOLD = 1e-10
#: Allowed negative excursion of Choi eigenvalues before declaring non-CP.
DEFAULT_PSD_TOL = 1e-9


class ChannelError(ValueError):
    """Base class for malformed channel input."""


class NotCompletelyPositive(ChannelError):
    pass


class DimensionMismatch(ChannelError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


def _check_square(m: np.ndarray, size: int, what: str) -> None:
    if m.shape != (size, size):
        raise DimensionMismatch(f"{what} has shape {m.shape}, expected ({size}, {size})")
    if not np.all(np.isfinite(m)):
        raise ChannelError(f"{what} has non-finite entries")


@dataclass(frozen=True, eq=False)
class KrausSet:
    """An ordered list of ``d x d`` Kraus operators."""

    ops: tuple[np.ndarray, ...]

    def __init__(self, ops: Sequence[np.ndarray]):
        ops = [np.asarray(k, dtype=complex) for k in ops]
        if not ops:
            raise ChannelError("empty Kraus set")
        d = ops[0].shape[0]
        for i, k in enumerate(ops):
            _check_square(k, d, f"Kraus operator {i}")
        object.__setattr__(self, "ops", tuple(_frozen(k) for k in ops))

    @property
    def dim(self) -> int:
        return self.ops[0].shape[0]

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.ops[i]

    def completeness(self) -> np.ndarray:
        """``sum_k K^dag K``."""
        return sum(dagger(k) @ k for k in self.ops)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ dagger(k) for k in self.ops)


@dataclass(frozen=True, eq=False)
class SuperOperator:
    """``d^2 x d^2`` matrix acting on row-stacked density matrices."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = int(round(np.sqrt(m.shape[0])))
        _check_square(m, d * d, "superoperator")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.matrix.shape[0])))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        d = self.dim
        return (self.matrix @ np.asarray(rho, dtype=complex).reshape(-1)).reshape(d, d)

    def compose(self, first: "SuperOperator") -> "SuperOperator":
        """The channel that applies ``first`` and then ``self``."""
        return SuperOperator(self.matrix @ first.matrix)


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    """Choi matrix ``M = d * (T (x) id)(|Omega><Omega|)``; trace ``d`` when TP."""

    matrix: np.ndarray
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = int(round(np.sqrt(m.shape[0])))
        _check_square(m, d * d, "Choi matrix")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.matrix.shape[0])))

    def spectrum(self) -> np.ndarray:
        """Eigenvalues of the symmetrized matrix, descending."""
        return np.sort(np.linalg.eigvalsh(hermitize(self.matrix)))[::-1]


Representation = Union[KrausSet, SuperOperator, ChoiMatrix]


def _reshuffle(a: np.ndarray, d: int) -> np.ndarray:
    # T[(i,j),(m,n)] <-> M[(i,m),(j,n)]; the map is its own inverse.
    return a.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)


def kraus_to_superop(k: KrausSet) -> SuperOperator:
    return SuperOperator(sum(np.kron(op, op.conj()) for op in k.ops))


def superop_to_choi(s: SuperOperator) -> ChoiMatrix:
    return ChoiMatrix(hermitize(_reshuffle(s.matrix, s.dim)))


def choi_to_superop(c: ChoiMatrix) -> SuperOperator:
    return SuperOperator(_reshuffle(c.matrix, c.dim))


def kraus_to_choi(k: KrausSet) -> ChoiMatrix:
    vecs = np.column_stack([op.reshape(-1) for op in k.ops])
    return ChoiMatrix(hermitize(vecs @ vecs.conj().T))


def choi_to_kraus(
    c: ChoiMatrix,
    threshold: float | None = None,
    psd_tol: float = DEFAULT_PSD_TOL,
) -> KrausSet:
    """Minimal Kraus set from the eigendecomposition of a Choi matrix.

    Each eigenpair with ``lambda > threshold`` becomes the operator
    ``sqrt(lambda) * v`` reshaped row-major to ``d x d``. Operators come out
    in descending eigenvalue order.

    Raises:
        NotCompletelyPositive: if an eigenvalue is below ``-psd_tol``.
    """
    threshold = c.threshold if threshold is None else threshold
    d = c.dim
    w, v = sorted_eigh(c.matrix)
    if w[-1] < -psd_tol:
        raise NotCompletelyPositive(f"Choi matrix has eigenvalue {w[-1]:.3e}")
    ops = [np.sqrt(lam) * v[:, i].reshape(d, d) for i, lam in enumerate(w) if lam > threshold]
    if not ops:
        ops = [np.zeros((d, d), dtype=complex)]
    return KrausSet(ops)


def minimal_kraus(k: KrausSet, threshold: float = DEFAULT_THRESHOLD) -> KrausSet:
    """Reduce a Kraus set with the overlap-matrix method.

    Builds ``C[i, j] = Tr(K_i K_j^dag)``, diagonalizes ``C = V^dag D V`` and
    forms ``K~_i = sum_j V[i, j] K_j``. Operators whose magnitude
    ``Tr(K~^dag K~)`` (the corresponding entry of ``D``) is at or below
    ``threshold`` are dropped.
    """
    flat = np.column_stack([op.reshape(-1) for op in k.ops])
    overlap = flat.T @ flat.conj()
    w, u = sorted_eigh(overlap)
    mixing = u.conj().T
    ops = []
    for i, lam in enumerate(w):
        if lam <= threshold:
            continue
        vec = fix_phase(flat @ mixing[i])
        ops.append(vec.reshape(k.dim, k.dim))
    if not ops:
        ops = [np.zeros((k.dim, k.dim), dtype=complex)]
    return KrausSet(ops)


def kraus_magnitudes(k: KrausSet) -> list[float]:
    """``Tr(K_i^dag K_i)`` for each operator, in the set's order."""
    return [float(np.real(np.vdot(op, op))) for op in k.ops]


def channel_determinant(s: SuperOperator) -> complex:
    return complex(np.linalg.det(s.matrix))


def pad_to_square(ops: Sequence[np.ndarray]) -> tuple[list[np.ndarray], tuple[int, int]]:
    """Zero-pad rectangular Kraus operators to a common square size.

    Returns the padded operators and the original ``(d_out, d_in)``.
    """
    ops = [np.asarray(k, dtype=complex) for k in ops]
    shape = ops[0].shape
    if any(k.shape != shape for k in ops):
        raise DimensionMismatch("Kraus operators have differing shapes")
    d = max(shape)
    padded = []
    for k in ops:
        z = np.zeros((d, d), dtype=complex)
        z[: shape[0], : shape[1]] = k
        padded.append(z)
    return padded, (int(shape[0]), int(shape[1]))


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    """A channel given in any one representation, converted on demand.

    ``meta`` carries provenance such as zero padding of rectangular input or
    steady-state convergence data.
    """

    data: Representation
    label: str = ""
    threshold: float = DEFAULT_THRESHOLD
    meta: Mapping[str, object] = field(default_factory=dict)

    @classmethod
    def from_kraus(cls, ops: Sequence[np.ndarray], label: str = "", **kw) -> "ChannelSpec":
        padded, shape = pad_to_square(ops)
        meta = dict(kw.pop("meta", {}))
        if shape[0] != shape[1]:
            meta["padding"] = {"d_out": shape[0], "d_in": shape[1], "dim": padded[0].shape[0]}
        return cls(KrausSet(padded), label=label, meta=meta, **kw)

    @property
    def dim(self) -> int:
        return self.data.dim

    @property
    def repr_name(self) -> str:
        return {KrausSet: "kraus", SuperOperator: "superop", ChoiMatrix: "choi"}[type(self.data)]

    @cached_property
    def superop(self) -> SuperOperator:
        if isinstance(self.data, SuperOperator):
            return self.data
        if isinstance(self.data, KrausSet):
            return kraus_to_superop(self.data)
        return choi_to_superop(self.data)

    @cached_property
    def choi(self) -> ChoiMatrix:
        if isinstance(self.data, ChoiMatrix):
            return ChoiMatrix(self.data.matrix, self.threshold)
        if isinstance(self.data, KrausSet):
            m = kraus_to_choi(self.data).matrix
        else:
            m = superop_to_choi(self.data).matrix
        return ChoiMatrix(m, self.threshold)

    @cached_property
    def kraus(self) -> KrausSet:
        """Minimal Kraus representation (via the Choi spectrum)."""
        return choi_to_kraus(self.choi, self.threshold)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return self.superop.apply(rho)


def as_spec(c: Union[ChannelSpec, Representation]) -> ChannelSpec:
    return c if isinstance(c, ChannelSpec) else ChannelSpec(c)


def kraus_rank(
    c: Union[ChannelSpec, Representation],
    threshold: float = DEFAULT_THRESHOLD,
    psd_tol: float = DEFAULT_PSD_TOL,
) -> int:
    """Number of Choi eigenvalues above ``threshold``."""
    w = as_spec(c).choi.spectrum()
    if w[-1] < -psd_tol:
        raise NotCompletelyPositive(f"Choi matrix has eigenvalue {w[-1]:.3e}")
    return int(np.count_nonzero(w > threshold))


@dataclass(frozen=True, eq=False)
class ValidationReport:
    completeness_residual: float
    choi_min_eigenvalue: float
    trace_deviation: float
    tol: float

    @property
    def is_cp(self) -> bool:
        return self.choi_min_eigenvalue >= -self.tol

    @property
    def is_tp(self) -> bool:
        return self.completeness_residual <= self.tol and self.trace_deviation <= self.tol

    @property
    def passed(self) -> bool:
        return self.is_cp and self.is_tp

    def to_dict(self) -> dict:
        return {
            "completeness_residual": self.completeness_residual,
            "choi_min_eigenvalue": self.choi_min_eigenvalue,
            "trace_deviation": self.trace_deviation,
            "tol": self.tol,
            "passed": self.passed,
        }


def validate_cptp(c: Union[ChannelSpec, Representation], tol: float = 1e-9) -> ValidationReport:
    """Check complete positivity and trace preservation.

    Residuals are Frobenius norms. For a non-Kraus input the completeness
    sum is read off the Choi matrix: ``sum K^dag K = (Tr_out M)^T``.
    """
    spec = as_spec(c)
    d = spec.dim
    if isinstance(spec.data, KrausSet):
        comp = spec.data.completeness()
    else:
        m = spec.choi.matrix.reshape(d, d, d, d)
        comp = np.einsum("imin->mn", m).T
    w = spec.choi.spectrum()
    return ValidationReport(
        completeness_residual=float(np.linalg.norm(comp - np.eye(d))),
        choi_min_eigenvalue=float(w[-1]),
        trace_deviation=float(abs(np.trace(spec.choi.matrix).real - d)),
        tol=tol,
    )


def identity_channel(d: int) -> ChannelSpec:
    return ChannelSpec(KrausSet([np.eye(d)]), label="identity")


def choi_distance(a: Union[ChannelSpec, Representation], b: Union[ChannelSpec, Representation]) -> float:
    """Frobenius distance between Choi matrices; zero iff equal channels."""
    a, b = as_spec(a), as_spec(b)
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions {a.dim} and {b.dim} differ")
    return float(np.linalg.norm(a.choi.matrix - b.choi.matrix))
