"""Bulk spectrum of the Harper matrix.

The empirical eigenvalue distribution of M_n(a) converges to the law of
(X + Y)/2 with X, Y independent arcsine variables. Its density is

    f2(x) = 4 / (pi^2 (1 + |x|)) K((1 - |x|) / (1 + |x|)),   |x| <= 1,

with K the complete elliptic integral of the first kind in modulus form,
evaluated here by the arithmetic-geometric mean.
"""
import logging
from typing import Callable, Optional, Union

import numpy as np
import pandas as pd
from scipy import integrate, special
from scipy.interpolate import PchipInterpolator

from harper.config import settings
from harper.exceptions import DomainError, SingularityError
from harper.models import EmpiricalMeasure
from harper.spectral.core import build_harper, dense_hermitian_eigen

logger = logging.getLogger(__name__)

_F2_SCALE = 4.0 / np.pi ** 2
_AGM_MAX_ITER = 64
_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(8)


def _scalar_or_array(values: np.ndarray, like) -> Union[float, np.ndarray]:
    return float(values) if np.ndim(like) == 0 else values


# Special functions
def elliptic_k(m):
    """K(m) = int_0^1 dt / sqrt((1 - t^2)(1 - m^2 t^2)) = pi / (2 AGM(1, sqrt(1 - m^2)))"""
    modulus = np.asarray(m, dtype=float)
    if np.any(modulus >= 1.0):
        raise SingularityError("K(m) diverges at m = 1")
    if np.any(modulus < 0.0):
        raise DomainError("modulus must be >= 0")
    a = np.ones_like(modulus)
    b = np.sqrt((1.0 - modulus) * (1.0 + modulus))
    for _ in range(_AGM_MAX_ITER):
        if np.all(np.abs(a - b) <= 1e-15 * a):
            break
        a, b = 0.5 * (a + b), np.sqrt(a * b)
    return _scalar_or_array(np.pi / (a + b), m)


def hypergeometric_k(m):
    """(pi/2) 2F1(1/2, 1/2; 1; m^2), an independent check on elliptic_k"""
    m = np.asarray(m, dtype=float)
    return _scalar_or_array(0.5 * np.pi * special.hyp2f1(0.5, 0.5, 1.0, m ** 2), m)


def arcsine_density(x):
    """1 / (pi sqrt(1 - x^2)) on (-1, 1); +inf at +-1, 0 outside"""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.where(ax < 1.0, 1.0 / (np.pi * np.sqrt(np.clip(1.0 - x ** 2, 0.0, None))), 0.0)
    values = np.where(ax == 1.0, np.inf, values)
    return _scalar_or_array(values, x)


def _k_inside(modulus: np.ndarray) -> np.ndarray:
    out = np.zeros_like(modulus)
    inside = modulus < 1.0
    if np.any(inside):
        out[inside] = elliptic_k(modulus[inside])
    return out


def f2_density(x):
    """Limiting eigenvalue density; +inf at 0, 0 outside [-1, 1]"""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    support = (ax > 0.0) & (ax <= 1.0)
    values = np.zeros_like(ax)
    if np.any(support):
        s = ax[support]
        values[support] = _F2_SCALE / (1.0 + s) * _k_inside((1.0 - s) / (1.0 + s))
    values = np.where(ax == 0.0, np.inf, values)
    return _scalar_or_array(values, x)


def f3_integral(x):
    """int dt / sqrt((1 - t^2)(1 - (x - t)^2)) = 4 / (2 + |x|) K((2 - |x|) / (2 + |x|)) for 0 < |x| <= 2"""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    support = (ax > 0.0) & (ax <= 2.0)
    values = np.zeros_like(ax)
    if np.any(support):
        s = ax[support]
        values[support] = 4.0 / (2.0 + s) * _k_inside((2.0 - s) / (2.0 + s))
    values = np.where(ax == 0.0, np.inf, values)
    return _scalar_or_array(values, x)


def f3_quadrature(x: float) -> float:
    """The f3 integral by Gauss-Jacobi quadrature with the two endpoint singularities as weight"""
    s = abs(float(x))
    if s == 0.0:
        raise SingularityError("f3 diverges at 0")
    if s >= 2.0:
        raise DomainError("quadrature form needs 0 < |x| < 2")
    lo, hi = s - 1.0, 1.0
    value, _ = integrate.quad(
        lambda t: 1.0 / np.sqrt((1.0 + t) * (1.0 + s - t)),
        lo, hi, weight="alg", wvar=(-0.5, -0.5), epsabs=1e-13, epsrel=1e-12,
    )
    return float(value)


# Limit law
class DensityCurve:
    """A symmetric density on [-1, 1] with a cached CDF grid for quantiles.

    The CDF is integrated in the variable s = sqrt(|x|), which removes the
    logarithmic singularity of f2 at the origin, with 8-point Gauss-Legendre
    rules per panel.
    """

    def __init__(self, density: Callable = f2_density, grid_points: Optional[int] = None):
        self.density = density
        panels = grid_points or settings.quantile_grid_points
        edges = np.linspace(0.0, 1.0, panels // 2 + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        s = mid[:, None] + half[:, None] * _GAUSS_NODES[None, :]
        integrand = np.asarray(density(s ** 2)) * 2.0 * s
        pieces = (integrand * _GAUSS_WEIGHTS[None, :]).sum(axis=1) * half
        positive_x = edges ** 2
        positive_cdf = 0.5 + np.concatenate([[0.0], np.cumsum(pieces)])
        self.total_mass = 2.0 * (positive_cdf[-1] - 0.5)
        if not np.isfinite(self.total_mass) or abs(self.total_mass - 1.0) > 1e-6:
            raise DomainError(f"density integrates to {self.total_mass}, not 1")
        self.x_grid = np.concatenate([-positive_x[:0:-1], positive_x])
        self.cdf_grid = np.concatenate([1.0 - positive_cdf[:0:-1], positive_cdf])
        self._cdf = PchipInterpolator(self.x_grid, self.cdf_grid, extrapolate=False)
        self._quantile = PchipInterpolator(self.cdf_grid, self.x_grid, extrapolate=False)

    def __call__(self, x):
        return self.density(x)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        values = np.where(x <= -1.0, 0.0, np.where(x >= 1.0, 1.0, self._cdf(np.clip(x, -1.0, 1.0))))
        return _scalar_or_array(values, x)

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        if np.any((u < 0.0) | (u > 1.0)):
            raise DomainError("quantile level must lie in [0, 1]")
        levels = np.clip(u, self.cdf_grid[0], self.cdf_grid[-1])
        return _scalar_or_array(self._quantile(levels), u)


def sample_half_sum_arcsine(size: int, rng: np.random.Generator) -> np.ndarray:
    """(X + Y)/2 with X = cos(2 pi U), Y = cos(2 pi V)"""
    x = np.cos(2 * np.pi * rng.random(size))
    y = np.cos(2 * np.pi * rng.random(size))
    return 0.5 * (x + y)


# Empirical side
def empirical_measure(eigenvalues) -> EmpiricalMeasure:
    return EmpiricalMeasure(atoms=np.sort(np.asarray(eigenvalues, dtype=float)))


def harper_empirical_measure(n: int, a: int = 1) -> EmpiricalMeasure:
    spectrum = dense_hermitian_eigen(build_harper(n, a).to_dense(), with_vectors=False)
    logger.info(f"eigensolve finished for M_{n}({a})")
    return EmpiricalMeasure(atoms=spectrum.eigenvalues[::-1])


def _empirical_quantile(emp: EmpiricalMeasure, u: np.ndarray) -> np.ndarray:
    idx = np.minimum(np.floor(u * emp.n).astype(int), emp.n - 1)
    return emp.atoms[idx]


def wasserstein2_empirical(first: EmpiricalMeasure, second: EmpiricalMeasure) -> float:
    """Exact W2 between two empirical measures on the merged quantile breakpoints"""
    breaks = np.union1d(np.arange(first.n + 1) / first.n, np.arange(second.n + 1) / second.n)
    widths = np.diff(breaks)
    mids = 0.5 * (breaks[1:] + breaks[:-1])
    gap = _empirical_quantile(first, mids) - _empirical_quantile(second, mids)
    return float(np.sqrt(np.sum(widths * gap ** 2)))


def wasserstein2(emp: EmpiricalMeasure, curve: Union[DensityCurve, EmpiricalMeasure]) -> float:
    """sqrt(int_0^1 (Q_emp(u) - Q_curve(u))^2 du) on 10n midpoints"""
    if isinstance(curve, EmpiricalMeasure):
        return wasserstein2_empirical(emp, curve)
    if abs(curve.total_mass - 1.0) > 1e-6:
        raise DomainError("curve is not a probability density")
    m = 10 * emp.n
    u = (np.arange(m) + 0.5) / m
    gap = _empirical_quantile(emp, u) - curve.quantile(u)
    return float(np.sqrt(np.mean(gap ** 2)))


# Tables
def figure1_data(
    n: int,
    a: int = 1,
    bins: int = 100,
    curve: Optional[DensityCurve] = None,
    emp: Optional[EmpiricalMeasure] = None,
) -> pd.DataFrame:
    """Histogram of the eigenvalues of M_n(a) next to f2 at the bin midpoints"""
    if bins < 20:
        raise DomainError(f"need at least 20 bins, got {bins}")
    if n > settings.figure_max_n:
        raise DomainError(f"n = {n} exceeds the eigensolve guard {settings.figure_max_n}")
    if emp is None:
        emp = harper_empirical_measure(n, a)
    elif emp.n != n:
        raise DomainError(f"measure has {emp.n} atoms, expected {n}")
    counts, edges = np.histogram(emp.atoms, bins=bins, range=(-1.0, 1.0))
    widths = np.diff(edges)
    mids = 0.5 * (edges[1:] + edges[:-1])
    density = curve if curve is not None else f2_density
    return pd.DataFrame({
        "bin_left": edges[:-1],
        "bin_right": edges[1:],
        "count": counts,
        "empirical_density": counts / (emp.n * widths),
        "f2_at_midpoint": np.asarray(density(mids)),
    })


def density_table(points: int = 201) -> pd.DataFrame:
    x = np.linspace(-1.0, 1.0, points)
    x = x[x != 0.0]
    return pd.DataFrame({"x": x, "f2": f2_density(x)})
