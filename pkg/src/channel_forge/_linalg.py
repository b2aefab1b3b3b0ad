"""Deterministic dense linear algebra used throughout the package.

Every eigen/SVD result that leaks into a public object goes through these
helpers so that repeated runs produce bit-identical matrices.
"""

from __future__ import annotations

import numpy as np

# Eigenvalues closer than this are treated as degenerate when ordering.
TIE_TOL = 1e-12


def hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so that its largest-magnitude entry is real and positive.

    The first index within ``TIE_TOL`` of the maximum wins, so vectors with
    several equally large entries still get a unique phase.
    """
    mags = np.abs(v)
    top = mags.max()
    if top == 0.0:
        return v.copy()
    idx = int(np.flatnonzero(mags >= top - TIE_TOL)[0])
    return v * (np.conj(v[idx]) / mags[idx])


def _order(values: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    # Descending by value; within a degenerate cluster, lexicographic on |v|.
    order = list(np.argsort(-values, kind="stable"))
    out: list[int] = []
    i = 0
    while i < len(order):
        j = i + 1
        while j < len(order) and values[order[i]] - values[order[j]] <= TIE_TOL:
            j += 1
        cluster = order[i:j]
        cluster.sort(key=lambda k: tuple(-np.round(np.abs(vecs[:, k]), 10)))
        out.extend(cluster)
        i = j
    return np.asarray(out, dtype=int)


def sorted_eigh(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix with a fixed convention.

    Returns eigenvalues in descending order and the matching eigenvectors as
    columns, each phase-normalized with :func:`fix_phase`. The input is
    symmetrized first.
    """
    w, v = np.linalg.eigh(hermitize(np.asarray(h, dtype=complex)))
    vecs = np.column_stack([fix_phase(v[:, k]) for k in range(v.shape[1])])
    idx = _order(w, vecs)
    return w[idx], vecs[:, idx]


def sorted_right_singular(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Singular values (descending) and right singular vectors of a tall matrix.

    Same ordering and phase rules as :func:`sorted_eigh`; equivalent to
    diagonalizing ``x^dag x`` but without squaring the condition number.
    """
    _, s, vh = np.linalg.svd(np.asarray(x, dtype=complex), full_matrices=False)
    v = vh.conj().T
    vecs = np.column_stack([fix_phase(v[:, k]) for k in range(v.shape[1])])
    idx = _order(s, vecs)
    return s[idx], vecs[:, idx]


def sorted_svd(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full SVD ``a = W @ diag(s) @ V^dag`` with phase-fixed right vectors.

    Singular values are descending (LAPACK order). Each column of ``V`` is
    phase-normalized and the matching column of ``W`` absorbs the phase, so
    the product is unchanged.
    """
    w, s, vh = np.linalg.svd(np.asarray(a, dtype=complex))
    v = vh.conj().T
    for k in range(v.shape[1]):
        fixed = fix_phase(v[:, k])
        nz = np.flatnonzero(np.abs(v[:, k]) > 0)
        if nz.size:
            ph = fixed[nz[0]] / v[nz[0], k]
            v[:, k] = fixed
            if k < w.shape[1]:
                w[:, k] = w[:, k] * ph
    return w, s, v


def complete_columns(cols: np.ndarray, n: int | None = None) -> np.ndarray:
    """Extend orthonormal columns to a full ``n x n`` unitary.

    New columns are standard-basis vectors orthogonalized against everything
    chosen so far. At each step the candidate with the largest residual norm
    is taken (lowest index on ties), which keeps the Gram-Schmidt step well
    conditioned and the result deterministic.
    """
    cols = np.asarray(cols, dtype=complex)
    if cols.ndim == 1:
        cols = cols[:, None]
    n = cols.shape[0] if n is None else n
    basis = [cols[:, k] for k in range(cols.shape[1])]
    eye = np.eye(n, dtype=complex)
    while len(basis) < n:
        q = np.column_stack(basis) if basis else np.zeros((n, 0), complex)
        resid = eye - q @ (q.conj().T @ eye)
        resid = resid - q @ (q.conj().T @ resid)
        norms = np.linalg.norm(resid, axis=0)
        k = int(np.flatnonzero(norms >= norms.max() - TIE_TOL)[0])
        basis.append(fix_phase(resid[:, k] / norms[k]))
    return np.column_stack(basis)


def is_unitary(u: np.ndarray, tol: float = 1e-10) -> bool:
    return np.linalg.norm(u.conj().T @ u - np.eye(u.shape[1])) < tol


def frobenius(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Half the trace norm of ``a - b`` for Hermitian inputs."""
    return 0.5 * float(np.abs(np.linalg.eigvalsh(hermitize(a - b))).sum())
