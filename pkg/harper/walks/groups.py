"""Random walks on the Heisenberg group H_1(n) and the affine group A_p.

Elements are addressed by integer index so distributions are flat numpy
vectors:

    H_1(n): (x, y, z) -> x n^2 + y n + z
    A_p:    (a, b)    -> (a - 1) p + b

Fourier coefficients use P_hat(rho) = sum_g P(g) rho(g), so convolution
becomes matrix multiplication and the chi-square distance to uniform is
sum over nontrivial rho of d_rho ||P_hat(rho)||_F^2.
"""
import logging
from functools import lru_cache
from typing import List, Tuple, Union

import numpy as np
import pandas as pd

from harper.config import settings
from harper.exceptions import DomainError
from harper.models import AffineElement, ChiSquareReport, GroupDistribution, HeisenbergElement, Irrep, IrrepTable
from harper.spectral.core import build_affine_transform, build_harper, dense_hermitian_eigen
from harper.utils.arithmetic import discrete_log_table, primitive_root, require_prime

logger = logging.getLogger(__name__)

Element = Union[HeisenbergElement, AffineElement]


class HeisenbergGroup:
    name = "heisenberg"

    def __init__(self, n: int):
        if n < 2:
            raise DomainError(f"Heisenberg group needs n >= 2, got {n}")
        self.modulus = n
        self.order = n ** 3
        self.x, self.y, self.z = (axis.ravel() for axis in np.indices((n, n, n)))

    def index(self, x, y, z):
        n = self.modulus
        return (np.mod(x, n) * n + np.mod(y, n)) * n + np.mod(z, n)

    def element(self, idx: int) -> HeisenbergElement:
        return HeisenbergElement(n=self.modulus, x=self.x[idx], y=self.y[idx], z=self.z[idx])

    def mul_index(self, left, right):
        """(x, y, z)(x', y', z') = (x + x', y + y', z + z' + x y')"""
        x, y, z = self.x, self.y, self.z
        return self.index(x[left] + x[right], y[left] + y[right], z[left] + z[right] + x[left] * y[right])

    def inverse_index(self, idx):
        x, y, z = self.x[idx], self.y[idx], self.z[idx]
        return self.index(-x, -y, x * y - z)

    @property
    def identity(self) -> int:
        return 0

    def generators(self) -> List[Tuple[int, float]]:
        return [(self.index(dx, dy, 0), 0.25) for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1))]


class AffineGroup:
    name = "affine"

    def __init__(self, p: int):
        require_prime(p, minimum=3)
        self.modulus = p
        self.order = p * (p - 1)
        grid = np.indices((p - 1, p))
        self.a = grid[0].ravel() + 1
        self.b = grid[1].ravel()

    def index(self, a, b):
        p = self.modulus
        return (np.mod(a, p) - 1) * p + np.mod(b, p)

    def element(self, idx: int) -> AffineElement:
        return AffineElement(p=self.modulus, a=self.a[idx], b=self.b[idx])

    def mul_index(self, left, right):
        """(a1, b1)(a2, b2) = (a1 a2, a1 b2 + b1)"""
        a, b = self.a, self.b
        return self.index(a[left] * a[right], a[left] * b[right] + b[left])

    def inverse_index(self, idx):
        p = self.modulus
        a_inv = np.array([pow(int(v), p - 2, p) for v in np.atleast_1d(self.a[idx])])
        result = self.index(a_inv, -a_inv * np.atleast_1d(self.b[idx]))
        return result if np.ndim(idx) else int(result[0])

    @property
    def identity(self) -> int:
        return self.index(1, 0)

    def generators(self) -> List[Tuple[int, float]]:
        p = self.modulus
        g = primitive_root(p)
        g_inv = pow(g, p - 2, p)
        return [(self.index(a, b), 0.2) for a, b in ((1, 0), (1, 1), (1, -1), (g, 0), (g_inv, 0))]


Group = Union[HeisenbergGroup, AffineGroup]


@lru_cache(maxsize=32)
def make_group(name: str, modulus: int) -> Group:
    if name == "heisenberg":
        return HeisenbergGroup(modulus)
    if name == "affine":
        return AffineGroup(modulus)
    raise DomainError(f"unknown group '{name}'")


def group_of(dist: GroupDistribution) -> Group:
    return make_group(dist.group, dist.modulus)


# Elements
def group_mul(g1: Element, g2: Element) -> Element:
    if type(g1) is not type(g2):
        raise DomainError("cannot multiply elements of different groups")
    if isinstance(g1, HeisenbergElement):
        if g1.n != g2.n:
            raise DomainError(f"modulus mismatch: {g1.n} vs {g2.n}")
        return HeisenbergElement(n=g1.n, x=g1.x + g2.x, y=g1.y + g2.y, z=g1.z + g2.z + g1.x * g2.y)
    if g1.p != g2.p:
        raise DomainError(f"modulus mismatch: {g1.p} vs {g2.p}")
    return AffineElement(p=g1.p, a=g1.a * g2.a, b=g1.a * g2.b + g1.b)


# Distributions
def _distribution(group: Group, weights: np.ndarray) -> GroupDistribution:
    return GroupDistribution(group=group.name, modulus=group.modulus, weights=weights)


def uniform(group: Group) -> GroupDistribution:
    return _distribution(group, np.full(group.order, 1.0 / group.order))


def point_mass(group: Group, idx: int) -> GroupDistribution:
    weights = np.zeros(group.order)
    weights[idx] = 1.0
    return _distribution(group, weights)


def step_distribution(group: Group) -> GroupDistribution:
    """The generating measure: 1/4 on (+-1,0,0), (0,+-1,0) or 1/5 on the five affine generators"""
    weights = np.zeros(group.order)
    for idx, w in group.generators():
        weights[idx] += w
    return _distribution(group, weights)


def _same_group(P: GroupDistribution, Q: GroupDistribution):
    if P.group != Q.group or P.modulus != Q.modulus:
        raise DomainError(f"group mismatch: {P.group}({P.modulus}) vs {Q.group}({Q.modulus})")


def convolve(P: GroupDistribution, Q: GroupDistribution) -> GroupDistribution:
    """(P * Q)(h s) accumulates P(h) Q(s)"""
    _same_group(P, Q)
    group = group_of(P)
    everything = np.arange(group.order)
    out = np.zeros(group.order)
    for s in np.flatnonzero(Q.weights):
        out[group.mul_index(everything, s)] += P.weights * Q.weights[s]
    return _distribution(group, out)


def _guard(group: Group):
    if group.order > settings.brute_force_max_order:
        raise DomainError(f"group of order {group.order} exceeds the brute-force limit {settings.brute_force_max_order}")


def convolution_power(Q: GroupDistribution, k: int) -> GroupDistribution:
    if k < 0:
        raise DomainError("k must be >= 0")
    group = group_of(Q)
    _guard(group)
    result = point_mass(group, group.identity)
    for _ in range(k):
        result = convolve(result, Q)
    return result


def tv_distance(P: GroupDistribution, Q: GroupDistribution) -> float:
    _same_group(P, Q)
    return float(0.5 * np.abs(P.weights - Q.weights).sum())


def brute_force_chi_square(P: GroupDistribution) -> float:
    """sum_g |P(g) - U(g)|^2 / U(g)"""
    order = P.order
    return float(order * np.sum((P.weights - 1.0 / order) ** 2))


# Representations
def heisenberg_irreps(p: int) -> IrrepTable:
    """p^2 characters (a, b) and p - 1 representations of dimension p"""
    require_prime(p, minimum=3)
    group = make_group("heisenberg", p)
    irreps = []
    for a in range(p):
        for b in range(p):
            irreps.append(Irrep(
                label=f"chi({a},{b})",
                dim=1,
                evaluate=lambda idx, a=a, b=b: np.array(
                    [[np.exp(2j * np.pi * (a * group.x[idx] + b * group.y[idx]) / p)]]
                ),
            ))
    w = np.arange(p)

    def big(idx, a):
        x, y, z = group.x[idx], group.y[idx], group.z[idx]
        R = np.zeros((p, p), dtype=complex)
        R[w, (w + x) % p] = np.exp(2j * np.pi * a * (y * w + z) / p)
        return R

    for a in range(1, p):
        irreps.append(Irrep(label=f"rho_{a}", dim=p, evaluate=lambda idx, a=a: big(idx, a)))
    return IrrepTable(group="heisenberg", modulus=p, order=group.order, irreps=irreps)


def affine_irreps(p: int) -> IrrepTable:
    """p - 1 characters rho_alpha and the (p-1)-dimensional rho in the basis delta_{g^m}"""
    require_prime(p, minimum=3)
    group = make_group("affine", p)
    g = primitive_root(p)
    sigma = discrete_log_table(p)
    log_a = np.array([sigma[int(a)] for a in group.a])
    powers = np.array([pow(g, m, p) for m in range(p - 1)])
    irreps = [
        Irrep(
            label=f"rho_alpha({alpha})",
            dim=1,
            evaluate=lambda idx, alpha=alpha: np.array([[np.exp(2j * np.pi * alpha * log_a[idx] / (p - 1))]]),
        )
        for alpha in range(p - 1)
    ]
    m = np.arange(p - 1)

    def big(idx):
        R = np.zeros((p - 1, p - 1), dtype=complex)
        R[m, (m + log_a[idx]) % (p - 1)] = np.exp(2j * np.pi * powers * group.b[idx] / p)
        return R

    irreps.append(Irrep(label="rho", dim=p - 1, evaluate=big))
    return IrrepTable(group="affine", modulus=p, order=group.order, irreps=irreps)


def irreps_for(group: Group) -> IrrepTable:
    if group.name == "heisenberg":
        return heisenberg_irreps(group.modulus)
    return affine_irreps(group.modulus)


def fourier_transform(P: GroupDistribution, table: IrrepTable) -> List[np.ndarray]:
    support = np.flatnonzero(P.weights)
    return [sum(P.weights[idx] * rho.evaluate(idx) for idx in support) for rho in table.irreps]


def inverse_fourier_transform(coefficients: List[np.ndarray], table: IrrepTable) -> np.ndarray:
    """f(g) = (1/|G|) sum_rho d_rho tr(rho(g^{-1}) f_hat(rho))"""
    group = make_group(table.group, table.modulus)
    values = np.zeros(group.order)
    for idx in range(group.order):
        inv = group.inverse_index(idx)
        total = sum(rho.dim * np.trace(rho.evaluate(inv) @ coef) for rho, coef in zip(table.irreps, coefficients))
        values[idx] = total.real / group.order
    return values


def plancherel_chi_square(coefficients: List[np.ndarray], table: IrrepTable) -> float:
    return float(sum(rho.dim * np.sum(np.abs(c) ** 2) for rho, c in zip(table.irreps[1:], coefficients[1:])))


# Closed forms
@lru_cache(maxsize=64)
def _heisenberg_spectrum(p: int) -> Tuple[np.ndarray, np.ndarray]:
    require_prime(p, minimum=3)
    c = np.cos(2 * np.pi * np.arange(p) / p)
    one_dim = ((c[:, None] + c[None, :]) / 2).ravel()[1:]  # drop (0, 0)
    big = np.concatenate([
        dense_hermitian_eigen(build_harper(p, a).to_dense(), with_vectors=False).eigenvalues for a in range(1, p)
    ])
    return one_dim, big


def heisenberg_chi_square(p: int, k: int) -> float:
    if k < 1:
        raise DomainError("k must be >= 1")
    one_dim, big = _heisenberg_spectrum(p)
    return float(np.sum(one_dim ** (2 * k)) + p * np.sum(big ** (2 * k)))


@lru_cache(maxsize=64)
def _affine_spectrum(p: int) -> Tuple[np.ndarray, np.ndarray]:
    require_prime(p, minimum=3)
    alpha = np.arange(1, p - 1)
    one_dim = 0.6 + 0.4 * np.cos(2 * np.pi * alpha / (p - 1))
    if p >= 5:
        big_matrix = build_affine_transform(p).to_dense()
    else:
        group = make_group("affine", p)
        big_matrix = fourier_transform(step_distribution(group), affine_irreps(p))[-1]
    big = dense_hermitian_eigen(big_matrix, with_vectors=False).eigenvalues
    return one_dim, big


def affine_chi_square_bound(p: int, k: int) -> ChiSquareReport:
    """Chi-square of Q^{*k} via the irreps; 4 TV^2 <= chi-square"""
    if k < 1:
        raise DomainError("k must be >= 1")
    one_dim, big = _affine_spectrum(p)
    ones = float(np.sum(np.abs(one_dim) ** (2 * k)))
    chi_square = ones + (p - 1) * float(np.sum(big ** (2 * k)))
    operator = ones + (p - 1) ** 2 * float(np.max(np.abs(big)) ** (2 * k))
    return ChiSquareReport(
        group="affine",
        modulus=p,
        k=k,
        chi_square=chi_square,
        tv_upper=0.5 * np.sqrt(chi_square),
        operator_norm_bound=operator,
    )


def affine_mixing_time(p: int, threshold: float = 0.04, k_max: int = 1_000_000) -> int:
    """Smallest k with chi-square(Q^{*k}, U) <= threshold"""
    one_dim, big = _affine_spectrum(p)
    ones, bigs = np.abs(one_dim) ** 2, np.abs(big) ** 2
    weights_ones, weights_big = np.ones_like(ones), np.full_like(bigs, p - 1.0)
    for k in range(1, k_max + 1):
        weights_ones *= ones
        weights_big *= bigs
        if weights_ones.sum() + weights_big.sum() <= threshold:
            return k
    raise DomainError(f"chi-square did not fall below {threshold} within {k_max} steps")


def chi_square(group: Group, k: int) -> float:
    if group.name == "heisenberg":
        return heisenberg_chi_square(group.modulus, k)
    return affine_chi_square_bound(group.modulus, k).chi_square


def distance_curve(name: str, modulus: int, k_max: int) -> pd.DataFrame:
    """Columns k, chi_square, tv_exact (NaN past the brute-force limit), tv_upper_bound"""
    group = make_group(name, modulus)
    brute = group.order <= settings.brute_force_max_order
    Q = step_distribution(group)
    U = uniform(group)
    current = Q
    rows = []
    for k in range(1, k_max + 1):
        chi = chi_square(group, k)
        rows.append({
            "k": k,
            "chi_square": chi,
            "tv_exact": tv_distance(current, U) if brute else np.nan,
            "tv_upper_bound": 0.5 * np.sqrt(chi),
        })
        if brute and k < k_max:
            current = convolve(current, Q)
    logger.info(f"distance curve for {name}({modulus}) up to k={k_max}, brute force={'on' if brute else 'off'}")
    return pd.DataFrame(rows)
