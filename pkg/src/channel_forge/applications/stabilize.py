"""Channels that reset any input to a fixed target state."""

from __future__ import annotations

import numpy as np

from .._linalg import sorted_eigh
from ..channel_repr import KrausSet

RANK_CUTOFF = 1e-12


def init_channel(sigma: np.ndarray) -> KrausSet:
    """Kraus set ``sqrt(lam_mu) |psi_mu><i|`` over eigenpairs of ``sigma`` and basis states ``i``.

    Ordered by eigenpair (descending weight), then by ``i``. Eigenvalues at
    or below ``RANK_CUTOFF`` are skipped, so there are ``d * rank(sigma)``
    operators.
    """
    sigma = np.asarray(sigma, dtype=complex)
    d = sigma.shape[0]
    w, v = sorted_eigh(sigma)
    ops = []
    for lam, psi in zip(w, v.T):
        if lam <= RANK_CUTOFF:
            continue
        for i in range(d):
            k = np.zeros((d, d), dtype=complex)
            k[:, i] = np.sqrt(lam) * psi
            ops.append(k)
    return KrausSet(ops)
