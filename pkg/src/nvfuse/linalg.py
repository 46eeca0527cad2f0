"""Small symmetric eigenproblems and the spectrum-mass cutoff pseudo-inverse."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import jacobi_eigen

MAX_DIM = 64
FLOOR = 1e-12


class SpectrumError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray   # descending
    eigenvectors: np.ndarray  # columns, matching order
    retained: int

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def as_symmetric(a) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return 0.5 * (a + a.T)


def sym_eigen(a) -> SpectralDecomposition:
    a = as_symmetric(a)
    if a.shape[0] > MAX_DIM:
        raise ValueError(f"matrix dimension {a.shape[0]} exceeds {MAX_DIM}")
    w, v, _ = jacobi_eigen(a)
    order = np.argsort(-w, kind="stable")
    return SpectralDecomposition(w[order], v[:, order], len(w))


def retained_count(eigenvalues: np.ndarray, eig_cutoff: float) -> int:
    """How many leading (descending) eigenvalues the cutoff keeps."""
    lam = np.clip(eigenvalues, 0.0, None)
    if lam.size == 0 or lam[0] <= 0.0:
        return 0
    cum = np.cumsum(lam)
    k = int(np.searchsorted(cum, eig_cutoff * cum[-1], side="left")) + 1
    k = min(k, lam.size)
    return int(np.count_nonzero(lam[:k] > FLOOR * lam[0]))


def pseudo_inverse_decomposition(a, eig_cutoff: float = 1.0) -> tuple[np.ndarray, SpectralDecomposition]:
    """Pseudo-inverse plus the decomposition it was built from."""
    if not 0.0 < eig_cutoff <= 1.0:
        raise ValueError(f"eig_cutoff must lie in (0, 1], got {eig_cutoff}")
    dec = sym_eigen(a)
    k = retained_count(dec.eigenvalues, eig_cutoff)
    if k == 0:
        raise SpectrumError("covariance matrix has no positive spectrum")
    dec = SpectralDecomposition(dec.eigenvalues, dec.eigenvectors, k)
    vk = dec.eigenvectors[:, :k]
    inv = (vk / dec.eigenvalues[:k]) @ vk.T
    return 0.5 * (inv + inv.T), dec


def spectral_pseudo_inverse(a, eig_cutoff: float = 1.0) -> np.ndarray:
    """Invert ``a`` on the eigen-subspace holding ``eig_cutoff`` of its spectrum mass.

    Negative eigenvalues are clamped to zero first; eigenvalues at or below
    ``1e-12 * largest`` are always dropped.
    """
    return pseudo_inverse_decomposition(a, eig_cutoff)[0]
