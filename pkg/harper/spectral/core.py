"""Matrix families, discrete Fourier transforms and exact spectra.

Everything else in the package checks itself against the eigensolvers in
this module, so they favour LAPACK drivers over speed tricks.
"""
import logging
from typing import Literal, Optional

import numpy as np
import pandas as pd
from scipy import linalg

from harper.config import settings
from harper.exceptions import DimensionError, DomainError, NumericalError, SymmetryError
from harper.models import CirculantPlusDiagonal, HermitianCirculant, RealDiagonal, Spectrum
from harper.utils.arithmetic import primitive_root, require_prime

logger = logging.getLogger(__name__)


# Fourier transforms
def _check_length(v: np.ndarray, n: Optional[int] = None) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1:
        raise DimensionError("expected a vector")
    if n is not None and v.shape[0] != n:
        raise DimensionError(f"vector has length {v.shape[0]}, expected {n}")
    if v.shape[0] < 1:
        raise DimensionError("empty vector")
    return v


def dft_forward(v, n: Optional[int] = None) -> np.ndarray:
    """u_hat(lam) = sum_k exp(-2 pi i lam k / n) v(k), unnormalized."""
    return np.fft.fft(_check_length(v, n))


def dft_inverse(w, n: Optional[int] = None) -> np.ndarray:
    return np.fft.ifft(_check_length(w, n))


def fourier_matrix(n: int) -> np.ndarray:
    """Unitary F_n with (F_n)_{jk} = exp(+2 pi i jk / n) / sqrt(n)."""
    if n < 1:
        raise DomainError("fourier matrix needs n >= 1")
    idx = np.arange(n)
    return np.exp(2j * np.pi * np.outer(idx, idx) / n) / np.sqrt(n)


# Matrix families
def nearest_neighbor_circulant(n: int, weight: float) -> HermitianCirculant:
    if n < 3:
        raise DomainError(f"circulant families need n >= 3, got {n}")
    row = np.zeros(n)
    row[1] = weight
    row[n - 1] = weight
    return HermitianCirculant(n=n, first_row=row)


def build_harper(n: int, a: int = 1) -> CirculantPlusDiagonal:
    """M_n(a): 1/4 at offsets +-1 (with corners) plus diag(cos(2 pi a j / n) / 2)"""
    if n < 3:
        raise DomainError(f"Harper matrix needs n >= 3, got {n}")
    if not 0 <= a <= n - 1:
        raise DomainError(f"a must lie in [0, {n - 1}], got {a}")
    j = np.arange(n)
    diagonal = 0.5 * np.cos(2 * np.pi * a * j / n)
    return CirculantPlusDiagonal(
        circulant=nearest_neighbor_circulant(n, 0.25),
        diagonal=RealDiagonal(entries=diagonal),
    )


def build_affine_transform(p: int) -> CirculantPlusDiagonal:
    """Transform of the affine-group walk at its (p-1)-dimensional representation.

    Basis delta_{g^m}, m = 0..p-2, for the smallest primitive root g; entry m of
    the diagonal is (1 + 2 cos(2 pi g^m / p)) / 5.
    """
    require_prime(p, minimum=5)
    g = primitive_root(p)
    powers = np.array([pow(g, m, p) for m in range(p - 1)])
    diagonal = (1.0 + 2.0 * np.cos(2 * np.pi * powers / p)) / 5.0
    return CirculantPlusDiagonal(
        circulant=nearest_neighbor_circulant(p - 1, 0.2),
        diagonal=RealDiagonal(entries=diagonal),
    )


def build_mp3_diagonal(p: int, c: int) -> CirculantPlusDiagonal:
    require_prime(p, minimum=3)
    if not 1 <= c <= p - 1:
        raise DomainError(f"c must lie in [1, {p - 1}], got {c}")
    j = np.arange(p)
    diagonal = 0.5 * np.cos(2 * np.pi * c * (1 + j * p) / p ** 2)
    return CirculantPlusDiagonal(
        circulant=nearest_neighbor_circulant(p, 0.25),
        diagonal=RealDiagonal(entries=diagonal),
    )


# Spectra
def circulant_eigenvalues_by_frequency(C: HermitianCirculant) -> np.ndarray:
    """lambda(b) = sum_j c_j exp(2 pi i j b / n), indexed by frequency b"""
    return (C.n * np.fft.ifft(C.first_row)).real


def circulant_eigendecomposition(C: HermitianCirculant, with_vectors: bool = True) -> Spectrum:
    by_frequency = circulant_eigenvalues_by_frequency(C)
    freqs = np.arange(C.n)
    # descending, ties by ascending frequency
    order = np.lexsort((freqs, -np.round(by_frequency, 12)))
    vectors = None
    if with_vectors:
        vectors = fourier_matrix(C.n)[:, order]
    return Spectrum(eigenvalues=by_frequency[order], eigenvectors=vectors, frequency_perm=order)


def require_hermitian(M: np.ndarray, tol: Optional[float] = None) -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    tol = settings.hermitian_tolerance if tol is None else tol
    scale = max(1.0, float(np.max(np.abs(M))) if M.size else 1.0)
    if np.max(np.abs(M - M.conj().T), initial=0.0) > tol * scale:
        raise SymmetryError("matrix is not Hermitian")
    return M


def dense_hermitian_eigen(M, with_vectors: bool = True) -> Spectrum:
    """Full spectrum by Householder tridiagonalization and implicit QR sweeps (LAPACK ?heev)."""
    M = require_hermitian(M)
    try:
        if with_vectors:
            values, vectors = linalg.eigh(M, driver="ev", check_finite=True)
        else:
            values = linalg.eigh(M, eigvals_only=True, driver="ev", check_finite=True)
            vectors = None
    except (linalg.LinAlgError, ValueError) as e:
        raise NumericalError(f"eigensolver failed: {e}")
    logger.debug(f"dense eigensolve finished for n={M.shape[0]}")
    values = values[::-1]
    if vectors is not None:
        vectors = vectors[:, ::-1]
    return Spectrum(eigenvalues=values, eigenvectors=vectors)


def extreme_eigenvalues(M, count: int, end: Literal["top", "bottom"] = "top") -> np.ndarray:
    """The `count` largest (descending) or smallest (ascending) eigenvalues"""
    M = require_hermitian(M)
    n = M.shape[0]
    if not 1 <= count <= n:
        raise DomainError(f"count must lie in [1, {n}]")
    window = [n - count, n - 1] if end == "top" else [0, count - 1]
    try:
        values = linalg.eigh(M, eigvals_only=True, subset_by_index=window)
    except (linalg.LinAlgError, ValueError) as e:
        raise NumericalError(f"eigensolver failed: {e}")
    return values[::-1] if end == "top" else values


def harper_spectrum(n: int, a: int = 1) -> np.ndarray:
    """Descending eigenvalues of M_n(a)"""
    return dense_hermitian_eigen(build_harper(n, a).to_dense(), with_vectors=False).eigenvalues


# Export tables
def spectrum_table(spectrum: Spectrum) -> pd.DataFrame:
    return pd.DataFrame({"index": np.arange(1, spectrum.n + 1), "eigenvalue": spectrum.eigenvalues})


def matrix_table(M: np.ndarray) -> pd.DataFrame:
    """Row-major dense entries; imaginary parts only when present"""
    M = np.asarray(M)
    rows, cols = np.indices(M.shape)
    table = pd.DataFrame({"row": rows.ravel(), "col": cols.ravel(), "real": M.real.ravel()})
    if np.iscomplexobj(M) and np.any(M.imag != 0):
        table["imag"] = M.imag.ravel()
    return table
