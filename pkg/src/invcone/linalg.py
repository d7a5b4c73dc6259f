"""Dense real linear-algebra kernels.

Everything downstream (half-maps, monodromy matrices, Newton updates) goes
through these few functions, so input validation lives here.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import RankDeficientError

__all__ = [
    "Spectrum",
    "expm",
    "expm_frechet",
    "phi1",
    "saad_expm",
    "eig",
    "solve_least_squares",
]


def _square(A, name="A"):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def expm(A):
    """Matrix exponential by scaling and squaring with a Pade approximant."""
    return scipy.linalg.expm(_square(A))


def expm_frechet(A, E):
    """Return ``(expm(A), L)`` where ``L`` is the Frechet derivative of expm at
    ``A`` in direction ``E``, read off the block exponential
    ``expm([[A, E], [0, A]])``.
    """
    A = _square(A)
    E = _square(E, "E")
    n = A.shape[0]
    if E.shape != A.shape:
        raise ValueError("direction E must match the shape of A")
    big = np.zeros((2 * n, 2 * n))
    big[:n, :n] = A
    big[:n, n:] = E
    big[n:, n:] = A
    X = scipy.linalg.expm(big)
    return X[:n, :n], X[:n, n:]


def saad_expm(B, c):
    """Exponential of the bordered matrix ``[[B, c], [0, 0]]``.

    The result has ``expm(B)`` in the leading block, ``phi1(B) @ c`` in the
    last column and ``(0, ..., 0, 1)`` as its last row.
    """
    B = _square(B, "B")
    c = np.asarray(c, dtype=float).reshape(-1)
    n = B.shape[0]
    if c.shape[0] != n:
        raise ValueError(f"c has length {c.shape[0]}, expected {n}")
    emb = np.zeros((n + 1, n + 1))
    emb[:n, :n] = B
    emb[:n, n] = c
    out = expm(emb)
    # the last row is exactly (0, ..., 0, 1) in exact arithmetic
    out[n, :n] = 0.0
    out[n, n] = 1.0
    return out


def phi1(A):
    """phi_1(A) = sum_k A^k / (k+1)!, so that A phi_1(A) = expm(A) - I.

    Computed from the embedding ``expm([[A, I], [0, 0]])``, which is well
    defined for singular ``A``.
    """
    A = _square(A)
    n = A.shape[0]
    emb = np.zeros((2 * n, 2 * n))
    emb[:n, :n] = A
    emb[:n, n:] = np.eye(n)
    return expm(emb)[:n, n:]


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues sorted by descending modulus, then real part, then
    imaginary part. ``eigenvectors[:, k]`` belongs to ``eigenvalues[k]``."""

    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray] = None

    @property
    def moduli(self):
        return np.abs(self.eigenvalues)

    def __len__(self):
        return len(self.eigenvalues)


def _spectral_order(lam):
    # round the keys so that conjugate pairs and round-off ties sort stably
    mod = np.round(np.abs(lam), 12)
    re = np.round(lam.real, 12)
    im = np.round(lam.imag, 12)
    return np.lexsort((-im, -re, -mod))


def eig(A, vectors=False):
    A = _square(A)
    try:
        if vectors:
            lam, V = np.linalg.eig(A)
        else:
            lam, V = np.linalg.eigvals(A), None
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigenvalue iteration did not converge: {exc}") from exc
    lam = lam.astype(complex)
    order = _spectral_order(lam)
    lam = lam[order]
    if V is not None:
        V = V[:, order]
    return Spectrum(lam, V)


def solve_least_squares(A, b, rcond=1e-10, allow_rank_deficient=False):
    """Minimum-norm least-squares solution of ``A x = b`` for ``m >= n``.

    Raises :class:`RankDeficientError` when the numerical rank (singular
    values above ``rcond * s_max``) is below ``n``, unless
    ``allow_rank_deficient`` is set.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2:
        raise ValueError("A must be two-dimensional")
    m, n = A.shape
    if m < n:
        raise ValueError(f"underdetermined system ({m} equations, {n} unknowns)")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ValueError("non-finite entries in least-squares system")
    x, _, rank, _ = np.linalg.lstsq(A, b, rcond=rcond)
    if rank < n and not allow_rank_deficient:
        raise RankDeficientError(f"matrix rank {rank} < {n} columns", rank)
    return x
