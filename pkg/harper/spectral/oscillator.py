"""Harmonic-oscillator limit of the Harper matrix.

Near the top of the spectrum n(I - M_n(1)) behaves like the operator
L = -1/4 d^2/dx^2 + pi^2 x^2, whose eigenvalues are (2k - 1) pi / 2. Near
the bottom the same holds after conjugating by a shift-and-twist unitary.
All inner products here are plain Euclidean ones on C^n.
"""
import logging
from typing import Iterable, Literal, Optional, Tuple

import numpy as np
import pandas as pd
from numpy.polynomial import hermite

from harper.exceptions import DimensionError, DomainError
from harper.models import HermiteApproximant, ScaledOperator
from harper.spectral.core import build_harper, extreme_eigenvalues
from harper.utils.parallel import parallel_map

logger = logging.getLogger(__name__)

MAX_HERMITE_LEVEL = 5
MIN_HERMITE_GRID = 100


def mu_k(k: int) -> float:
    if k < 1:
        raise DomainError(f"level k must be >= 1, got {k}")
    return (2 * k - 1) * np.pi / 2


def scaled_operator(n: int) -> ScaledOperator:
    return ScaledOperator(n=n, base=build_harper(n, 1))


def _vector(u, n: int) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (n,):
        raise DimensionError(f"vector has shape {u.shape}, expected ({n},)")
    return u


def quadratic_form_direct(u, n: int) -> float:
    u = _vector(u, n)
    return float(np.vdot(u, scaled_operator(n).apply(u)).real)


def quadratic_form_spectral(u, n: int) -> float:
    """sum_lam sin^2(pi lam/n)|u_hat(lam)|^2 + n sum_k sin^2(pi k/n)|u(k)|^2"""
    u = _vector(u, n)
    idx = np.arange(n)
    weights = np.sin(np.pi * idx / n) ** 2
    u_hat = np.fft.fft(u)
    return float(np.sum(weights * np.abs(u_hat) ** 2) + n * np.sum(weights * np.abs(u) ** 2))


def hermite_approximant(n: int, k: int) -> HermiteApproximant:
    """Discretized H_{k-1}(sqrt(2 pi) x) exp(-pi x^2) on x_j = (j - n//2)/sqrt(n), centred at index 0"""
    if not 1 <= k <= MAX_HERMITE_LEVEL:
        raise DomainError(f"Hermite approximants are available for k = 1..{MAX_HERMITE_LEVEL}, got {k}")
    if n < MIN_HERMITE_GRID:
        raise DomainError(f"Hermite approximants need n >= {MIN_HERMITE_GRID}, got {n}")
    x = (np.arange(n) - n // 2) / np.sqrt(n)
    coefficients = np.zeros(k)
    coefficients[k - 1] = 1.0
    values = hermite.hermval(np.sqrt(2 * np.pi) * x, coefficients) * np.exp(-np.pi * x ** 2)
    values = np.roll(values, -(n // 2))
    return HermiteApproximant(k=k, n=n, values=values / np.linalg.norm(values))


def rayleigh_quotient(op: ScaledOperator, v) -> float:
    v = _vector(v, op.n)
    norm_sq = float(np.vdot(v, v).real)
    if norm_sq == 0.0:
        raise DomainError("Rayleigh quotient of the zero vector")
    return float(np.vdot(v, op.apply(v)).real) / norm_sq


def conjugation_unitary_apply(u, n: int) -> np.ndarray:
    """v(k) = exp(2 pi i alpha k) u(k - s): s = (n+1)/2, alpha = -(n+1)/(2n) for odd n; s = n/2, alpha = -1/2 for even n"""
    u = _vector(u, n)
    k = np.arange(n)
    if n % 2 == 0:
        shift = n // 2
        phase = np.where(k % 2 == 0, 1.0, -1.0)
    else:
        shift = (n + 1) // 2
        alpha = -(n + 1) / (2 * n)
        phase = np.exp(2j * np.pi * alpha * k)
    return phase * np.roll(u, shift)


def conjugation_unitary_matrix(n: int) -> np.ndarray:
    return np.column_stack([conjugation_unitary_apply(e, n) for e in np.eye(n)])


def conjugated_harper(n: int) -> np.ndarray:
    """U M_n(1) U*, equal to -M_n(1) for even n"""
    U = conjugation_unitary_matrix(n)
    return U @ build_harper(n, 1).to_dense() @ U.conj().T


def near_negation_defect(u, n: int) -> Tuple[float, float]:
    """(|(n(I + U M U*) u, u) - Q(u)|, n^{-1/2} (Q(u) + ||u||^2)) with Q the form of n(I - M)"""
    u = _vector(u, n)
    flipped = n * (np.eye(n) + conjugated_harper(n))
    form = float(np.vdot(u, flipped @ u).real)
    q = quadratic_form_direct(u, n)
    scale = (q + float(np.vdot(u, u).real)) / np.sqrt(n)
    return abs(form - q), scale


def asymptotic_eigenvalue(n: int, k: int, end: Literal["top", "bottom"] = "top") -> float:
    if end == "top":
        return 1.0 - mu_k(k) / n
    return -1.0 + mu_k(k) / n


def _scaled_gaps(n: int, k_max: int) -> Tuple[np.ndarray, np.ndarray]:
    dense = build_harper(n, 1).to_dense()
    top = extreme_eigenvalues(dense, k_max, "top")
    bottom = extreme_eigenvalues(dense, k_max, "bottom")
    return n * (1.0 - top), n * (1.0 + bottom)


def convergence_table(ns: Iterable[int], ks: Iterable[int], n_jobs: Optional[int] = None) -> pd.DataFrame:
    """Columns n, k, end, scaled_gap, mu_k, abs_error for both spectrum ends"""
    ns, ks = list(ns), sorted(set(ks))
    gaps = parallel_map(lambda n: _scaled_gaps(n, max(ks)), ns, n_jobs=n_jobs)
    rows = []
    for n, (top, bottom) in zip(ns, gaps):
        for k in ks:
            for end, values in (("top", top), ("bottom", bottom)):
                rows.append({
                    "n": n,
                    "k": k,
                    "end": end,
                    "scaled_gap": values[k - 1],
                    "mu_k": mu_k(k),
                    "abs_error": abs(values[k - 1] - mu_k(k)),
                })
    logger.info(f"convergence table built for n in {ns}")
    return pd.DataFrame(rows)
