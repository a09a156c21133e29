"""Symmetrised Markov-operator estimate of a sampled path on a fixed basis."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .basis import OrthonormalBasis
from .errors import DegenerateOperatorWarning
from .sde import Path


@dataclass(frozen=True, eq=False)
class MarkovOperatorMatrix:
    entries: np.ndarray
    n_transitions: int
    basis_key: tuple


def estimate_operator(path: Path, basis: OrthonormalBasis) -> MarkovOperatorMatrix:
    """Entries ``(1/2N) sum_i [phi_j(X_{i-1}) phi_k(X_i) + phi_k(X_{i-1}) phi_j(X_i)]``.

    Evaluated as ``(A^T B + B^T A) / 2N`` with rows of ``A`` and ``B`` the
    basis at ``X_{i-1}`` and ``X_i``, then averaged with its own transpose
    so the result is symmetric bit for bit.
    """
    x = path.values
    n = x.size - 1
    if n < 1:
        raise ValueError("need at least one transition")
    phi = basis(x)
    if not np.any(phi):
        warnings.warn(f"path {path.label!r} lies entirely outside the basis support",
                      DegenerateOperatorWarning, stacklevel=2)
    A, B = phi[:-1], phi[1:]
    cross = A.T @ B
    P = (cross + cross.T) / (2.0 * n)
    P = (P + P.T) / 2.0
    P.flags.writeable = False
    return MarkovOperatorMatrix(P, n, basis.key)
