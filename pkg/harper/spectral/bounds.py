"""Uncertainty-principle bounds on the extreme eigenvalues of C + D.

The bound for the top eigenvalue of a Hermitian circulant C plus a real
diagonal D is

    lambda_1(C + D) <= lambda_1(C) + lambda_1(D)
                       - 1/2 min(a, b) (1 - sqrt(k k' / n))^2

with a = lambda_1(D) - lambda_{k+1}(D) and b = lambda_1(C) - lambda_{k'+1}(C).
The improved variant replaces min(a, b) / 2 by ab / (a + b); the smallest
variant mirrors everything at the bottom of the spectrum.
"""
import logging
from typing import Iterable, List, Literal, Tuple

import numpy as np

from harper.exceptions import DomainError, NormalizationError
from harper.models import BoundReport, ConcentrationReport, HermitianCirculant, RealDiagonal
from harper.spectral.core import circulant_eigenvalues_by_frequency

logger = logging.getLogger(__name__)

_UNIT_TOLERANCE = 1e-10
_GRID_FRACTIONS = np.arange(1, 10) / 10.0


# Concentration
def _unit_vector(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if abs(np.linalg.norm(z) - 1.0) > _UNIT_TOLERANCE:
        raise NormalizationError(f"expected a unit vector, got norm {np.linalg.norm(z):.3e}")
    return z


def _index_set(S: Iterable[int], n: int) -> np.ndarray:
    idx = np.unique(np.asarray(list(S), dtype=int))
    if idx.size and (idx[0] < 0 or idx[-1] >= n):
        raise DomainError(f"index set must lie in [0, {n - 1}]")
    return idx


def _off_set_norm(z: np.ndarray, S: np.ndarray) -> float:
    mask = np.ones(z.shape[0], dtype=bool)
    mask[S] = False
    return float(np.linalg.norm(z[mask]))


def concentration_defect(z, S: Iterable[int]) -> float:
    """Norm of the coordinates of the unit vector z outside S"""
    z = _unit_vector(z)
    return _off_set_norm(z, _index_set(S, z.shape[0]))


def unitary_transform(z) -> np.ndarray:
    return np.fft.fft(np.asarray(z, dtype=complex), norm="ortho")


def donoho_stark_holds(z, S: Iterable[int], T: Iterable[int]) -> Tuple[bool, ConcentrationReport]:
    """Check |S||T| >= n (1 - (eps_S + eps_T))_+^2 for z and its unitary transform"""
    z = _unit_vector(z)
    n = z.shape[0]
    S_idx, T_idx = _index_set(S, n), _index_set(T, n)
    eps_S = _off_set_norm(z, S_idx)
    eps_T = _off_set_norm(unitary_transform(z), T_idx)
    lhs = float(S_idx.size * T_idx.size)
    # the inequality says nothing once eps_S + eps_T exceeds 1
    rhs = n * max(0.0, 1.0 - (eps_S + eps_T)) ** 2
    report = ConcentrationReport(
        set_S=tuple(S_idx.tolist()), set_T=tuple(T_idx.tolist()), eps_S=eps_S, eps_T=eps_T, lhs=lhs, rhs=rhs
    )
    return lhs >= rhs - 1e-9 * n, report


def corollary_defect_bound(z, S: Iterable[int], T: Iterable[int]) -> Tuple[float, float]:
    """(||z off S||^2 + ||z_hat off T||^2, (1 - sqrt(kk'/n))^2 / 2); the first is never below the second"""
    z = _unit_vector(z)
    n = z.shape[0]
    S_idx, T_idx = _index_set(S, n), _index_set(T, n)
    k, k_prime = S_idx.size, T_idx.size
    if k * k_prime >= n:
        raise DomainError(f"need |S||T| < n, got {k}*{k_prime} >= {n}")
    lhs = _off_set_norm(z, S_idx) ** 2 + _off_set_norm(unitary_transform(z), T_idx) ** 2
    rhs = 0.5 * (1.0 - np.sqrt(k * k_prime / n)) ** 2
    return float(lhs), float(rhs)


# Eigenvalue bounds
def _descending(C: HermitianCirculant, D: RealDiagonal) -> Tuple[np.ndarray, np.ndarray]:
    if C.n != D.n:
        raise DomainError(f"C is {C.n}x{C.n} but D has {D.n} entries")
    c = np.sort(circulant_eigenvalues_by_frequency(C))[::-1]
    d = np.sort(D.entries)[::-1]
    return c, d


def _check_pair(n: int, k: int, k_prime: int):
    if not (1 <= k <= n - 1 and 1 <= k_prime <= n - 1):
        raise DomainError(f"k, k' must lie in [1, {n - 1}], got ({k}, {k_prime})")
    if k * k_prime >= n:
        raise DomainError(f"need k*k' < n, got {k}*{k_prime} >= {n}")


def _shrink(n: int, k: int, k_prime: int) -> float:
    return (1.0 - np.sqrt(k * k_prime / n)) ** 2


def _top_gaps(C: HermitianCirculant, D: RealDiagonal, k: int, k_prime: int):
    c, d = _descending(C, D)
    _check_pair(C.n, k, k_prime)
    weyl = float(c[0] + d[0])
    a = float(d[0] - d[k])
    b = float(c[0] - c[k_prime])
    return weyl, a, b


def theorem1_bound(C: HermitianCirculant, D: RealDiagonal, k: int, k_prime: int) -> BoundReport:
    weyl, a, b = _top_gaps(C, D, k, k_prime)
    correction = 0.5 * min(a, b) * _shrink(C.n, k, k_prime)
    return BoundReport(
        variant="theorem1", n=C.n, k=k, k_prime=k_prime, weyl_term=weyl, correction=correction, bound=weyl - correction
    )


def improved_bound(C: HermitianCirculant, D: RealDiagonal, k: int, k_prime: int) -> BoundReport:
    weyl, a, b = _top_gaps(C, D, k, k_prime)
    factor = a * b / (a + b) if a + b > 0 else 0.0
    correction = factor * _shrink(C.n, k, k_prime)
    return BoundReport(
        variant="improved", n=C.n, k=k, k_prime=k_prime, weyl_term=weyl, correction=correction, bound=weyl - correction
    )


def smallest_eigenvalue_bound(C: HermitianCirculant, D: RealDiagonal, l: int, l_prime: int) -> BoundReport:
    """Lower bound on lambda_n(C + D)"""
    c, d = _descending(C, D)
    n = C.n
    _check_pair(n, l, l_prime)
    weyl = float(c[-1] + d[-1])
    a = float(d[n - l - 1] - d[-1])
    b = float(c[n - l_prime - 1] - c[-1])
    correction = 0.5 * min(a, b) * _shrink(n, l, l_prime)
    return BoundReport(
        variant="smallest", n=n, k=l, k_prime=l_prime, weyl_term=weyl, correction=correction, bound=weyl + correction
    )


def bound_grid(n: int) -> List[Tuple[int, int]]:
    """(k, k') pairs on floor(c sqrt n) x floor(c' sqrt n) plus the diagonal k = k'"""
    root = np.sqrt(n)
    sides = sorted({max(1, int(np.floor(c * root))) for c in _GRID_FRACTIONS})
    pairs = {(k, kp) for k in sides for kp in sides}
    k = 1
    while k * k < n:
        pairs.add((k, k))
        k += 1
    return sorted((k, kp) for k, kp in pairs if k <= n - 1 and kp <= n - 1 and k * kp < n)


def optimize_bound(
    C: HermitianCirculant,
    D: RealDiagonal,
    variant: Literal["theorem1", "improved"] = "theorem1",
) -> BoundReport:
    evaluate = theorem1_bound if variant == "theorem1" else improved_bound
    best = None
    # grid is in lexicographic order, so strict comparison keeps the first of ties
    for k, k_prime in bound_grid(C.n):
        report = evaluate(C, D, k, k_prime)
        if best is None or report.bound < best.bound:
            best = report
    logger.info(f"best {variant} bound for n={C.n}: {best.bound:.12f} at k={best.k}, k'={best.k_prime}")
    return best


def harper_example_gap(n: int, c: float) -> float:
    """Predicted 1 - bound for the Harper matrix at k = k' = c sqrt(n)"""
    return (np.pi ** 2 / 8.0) * c ** 2 * (1.0 - c) ** 2 / n
