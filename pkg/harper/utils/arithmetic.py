"""Modular arithmetic helpers for the affine and Heisenberg groups."""
from functools import lru_cache
from typing import Dict, List

from harper.exceptions import DomainError


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


def require_prime(p: int, minimum: int = 2) -> int:
    if not is_prime(p) or p < minimum:
        raise DomainError(f"expected a prime >= {minimum}, got {p}")
    return p


def prime_factors(m: int) -> List[int]:
    factors = []
    d = 2
    while d * d <= m:
        if m % d == 0:
            factors.append(d)
            while m % d == 0:
                m //= d
        d += 1
    if m > 1:
        factors.append(m)
    return factors


@lru_cache(maxsize=None)
def primitive_root(p: int) -> int:
    """Smallest positive generator of (Z/pZ)*"""
    require_prime(p)
    if p == 2:
        return 1
    order = p - 1
    factors = prime_factors(order)
    for g in range(2, p):
        if all(pow(g, order // q, p) != 1 for q in factors):
            return g
    raise DomainError(f"no primitive root found for {p}")


@lru_cache(maxsize=None)
def discrete_log_table(p: int) -> Dict[int, int]:
    """Map a -> sigma(a) with g**sigma(a) = a mod p, for the smallest primitive root g"""
    g = primitive_root(p)
    table = {}
    value = 1
    for m in range(p - 1):
        table[value] = m
        value = value * g % p
    return table
