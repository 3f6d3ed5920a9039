import numpy as np
import pytest

from harper.config import settings
from harper.exceptions import DimensionError, DomainError
from harper.models import AffineElement, GroupDistribution, HeisenbergElement
from harper.spectral.core import build_affine_transform, build_harper
from harper.utils.arithmetic import discrete_log_table, is_prime, primitive_root
from harper.walks.groups import (
    affine_chi_square_bound,
    affine_irreps,
    affine_mixing_time,
    brute_force_chi_square,
    chi_square,
    convolution_power,
    convolve,
    distance_curve,
    fourier_transform,
    group_mul,
    heisenberg_chi_square,
    heisenberg_irreps,
    inverse_fourier_transform,
    irreps_for,
    make_group,
    plancherel_chi_square,
    point_mass,
    step_distribution,
    tv_distance,
    uniform,
)


def random_distribution(group, rng):
    weights = rng.random(group.order)
    return GroupDistribution(group=group.name, modulus=group.modulus, weights=weights / weights.sum())


class TestArithmetic:
    def test_primes(self):
        assert [p for p in range(20) if is_prime(p)] == [2, 3, 5, 7, 11, 13, 17, 19]

    @pytest.mark.parametrize("p,g", [(5, 2), (7, 3), (11, 2), (23, 5)])
    def test_smallest_primitive_root(self, p, g):
        assert primitive_root(p) == g

    def test_discrete_log_is_bijection(self):
        table = discrete_log_table(11)
        assert sorted(table) == list(range(1, 11))
        assert sorted(table.values()) == list(range(10))


class TestElements:
    def test_heisenberg_reduction(self):
        g = HeisenbergElement(n=5, x=7, y=-1, z=12)
        assert (g.x, g.y, g.z) == (2, 4, 2)

    def test_heisenberg_product(self):
        g = HeisenbergElement(n=7, x=1, y=2, z=3)
        h = HeisenbergElement(n=7, x=4, y=5, z=6)
        assert group_mul(g, h) == HeisenbergElement(n=7, x=5, y=0, z=3 + 6 + 1 * 5)

    def test_heisenberg_associativity(self, rng):
        n = 6
        for _ in range(20):
            a, b, c = (HeisenbergElement(n=n, x=v[0], y=v[1], z=v[2]) for v in rng.integers(0, n, size=(3, 3)))
            assert group_mul(group_mul(a, b), c) == group_mul(a, group_mul(b, c))

    def test_affine_product(self):
        g = AffineElement(p=7, a=3, b=2)
        h = AffineElement(p=7, a=5, b=4)
        assert group_mul(g, h) == AffineElement(p=7, a=1, b=0)

    def test_affine_rejects_zero_multiplier(self):
        with pytest.raises(DomainError):
            AffineElement(p=7, a=14, b=0)

    def test_modulus_mismatch(self):
        with pytest.raises(DomainError):
            group_mul(HeisenbergElement(n=3, x=0, y=0, z=0), HeisenbergElement(n=5, x=0, y=0, z=0))

    def test_group_mismatch(self):
        with pytest.raises(DomainError):
            group_mul(HeisenbergElement(n=3, x=0, y=0, z=0), AffineElement(p=3, a=1, b=0))

    @pytest.mark.parametrize("name,modulus", [("heisenberg", 4), ("affine", 7)])
    def test_index_tables_match_elements(self, name, modulus, rng):
        group = make_group(name, modulus)
        for left, right in rng.integers(0, group.order, size=(20, 2)):
            product = group_mul(group.element(left), group.element(right))
            assert group.element(group.mul_index(left, right)) == product
            assert group.mul_index(left, group.inverse_index(left)) == group.identity


class TestDistributions:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(DomainError):
            GroupDistribution(group="affine", modulus=5, weights=np.full(20, 0.1))

    def test_weights_must_match_order(self):
        with pytest.raises(DimensionError):
            GroupDistribution(group="heisenberg", modulus=3, weights=np.full(9, 1 / 9))

    def test_step_distribution(self):
        group = make_group("affine", 7)
        Q = step_distribution(group)
        assert Q.weights.sum() == pytest.approx(1.0)
        assert np.count_nonzero(Q.weights) == 5

    def test_uniform_absorbs(self, rng):
        group = make_group("heisenberg", 3)
        U = uniform(group)
        mixed = convolve(random_distribution(group, rng), U)
        np.testing.assert_allclose(mixed.weights, U.weights, atol=1e-15)

    def test_zeroth_power_is_identity(self):
        group = make_group("affine", 5)
        power = convolution_power(step_distribution(group), 0)
        np.testing.assert_array_equal(power.weights, point_mass(group, group.identity).weights)

    def test_tv_and_chi_square_of_uniform(self):
        group = make_group("affine", 5)
        U = uniform(group)
        assert tv_distance(U, U) == 0.0
        assert brute_force_chi_square(U) == pytest.approx(0.0, abs=1e-25)

    def test_brute_force_guard(self, monkeypatch):
        monkeypatch.setattr(settings, "brute_force_max_order", 10)
        with pytest.raises(DomainError):
            convolution_power(step_distribution(make_group("affine", 5)), 2)


class TestRepresentations:
    @pytest.mark.parametrize("p", [3, 5])
    def test_heisenberg_completeness(self, p):
        table = heisenberg_irreps(p)
        assert len(table.irreps) == p * p + p - 1
        assert sum(rho.dim ** 2 for rho in table.irreps) == p ** 3

    @pytest.mark.parametrize("p", [3, 5, 7])
    def test_affine_completeness(self, p):
        table = affine_irreps(p)
        assert len(table.irreps) == p
        assert sum(rho.dim ** 2 for rho in table.irreps) == p * (p - 1)

    @pytest.mark.parametrize("name,p", [("heisenberg", 3), ("affine", 5)])
    def test_homomorphism(self, name, p, rng):
        group = make_group(name, p)
        table = irreps_for(group)
        for left, right in rng.integers(0, group.order, size=(10, 2)):
            product = group.mul_index(left, right)
            for rho in table.irreps:
                np.testing.assert_allclose(rho.evaluate(left) @ rho.evaluate(right), rho.evaluate(product), atol=1e-12)

    @pytest.mark.parametrize("p", [3, 5, 7])
    def test_heisenberg_transform_is_harper(self, p):
        coefficients = fourier_transform(step_distribution(make_group("heisenberg", p)), heisenberg_irreps(p))
        for a in range(1, p):
            np.testing.assert_allclose(coefficients[p * p + a - 1], build_harper(p, a).to_dense(), atol=1e-14)

    @pytest.mark.parametrize("p", [5, 7, 11])
    def test_affine_transform_is_circulant_plus_diagonal(self, p):
        coefficients = fourier_transform(step_distribution(make_group("affine", p)), affine_irreps(p))
        np.testing.assert_allclose(coefficients[-1], build_affine_transform(p).to_dense(), atol=1e-14)

    @pytest.mark.parametrize("name,p", [("heisenberg", 3), ("affine", 7)])
    def test_inversion(self, name, p, rng):
        group = make_group(name, p)
        table = irreps_for(group)
        P = random_distribution(group, rng)
        np.testing.assert_allclose(inverse_fourier_transform(fourier_transform(P, table), table), P.weights, atol=1e-13)

    @pytest.mark.parametrize("name,p", [("heisenberg", 3), ("affine", 7)])
    def test_plancherel(self, name, p, rng):
        group = make_group(name, p)
        table = irreps_for(group)
        P = random_distribution(group, rng)
        assert plancherel_chi_square(fourier_transform(P, table), table) == pytest.approx(brute_force_chi_square(P))


class TestChiSquare:
    @pytest.mark.parametrize("p", [3, 5])
    def test_heisenberg_matches_brute_force(self, p):
        group = make_group("heisenberg", p)
        Q = step_distribution(group)
        current = Q
        for k in range(1, 7):
            np.testing.assert_allclose(heisenberg_chi_square(p, k), brute_force_chi_square(current), rtol=1e-8)
            current = convolve(current, Q)

    @pytest.mark.parametrize("p", [3, 5, 7])
    def test_affine_matches_brute_force(self, p):
        group = make_group("affine", p)
        Q = step_distribution(group)
        current = Q
        for k in range(1, 9):
            report = affine_chi_square_bound(p, k)
            np.testing.assert_allclose(report.chi_square, brute_force_chi_square(current), rtol=1e-8)
            assert report.operator_norm_bound >= report.chi_square * (1 - 1e-12)
            assert report.tv_upper >= tv_distance(current, uniform(group))
            current = convolve(current, Q)

    @pytest.mark.parametrize("name,p", [("heisenberg", 3), ("heisenberg", 7), ("affine", 5), ("affine", 13)])
    def test_nonincreasing_in_k(self, name, p):
        group = make_group(name, p)
        values = np.array([chi_square(group, k) for k in range(1, 31)])
        assert np.all(np.diff(values) <= 1e-12 * values[:-1])

    def test_operator_norm_variant(self):
        p, k = 11, 4
        alpha = np.arange(1, p - 1)
        ones = np.sum((0.6 + 0.4 * np.cos(2 * np.pi * alpha / (p - 1))) ** (2 * k))
        top = np.max(np.abs(np.linalg.eigvalsh(build_affine_transform(p).to_dense())))
        report = affine_chi_square_bound(p, k)
        assert report.operator_norm_bound == pytest.approx(ones + (p - 1) ** 2 * top ** (2 * k), rel=1e-10)

    def test_long_run_uniformity(self):
        group = make_group("heisenberg", 3)
        walked = convolution_power(step_distribution(group), 50)
        assert tv_distance(walked, uniform(group)) <= 1e-3

    def test_dispatch(self):
        assert chi_square(make_group("heisenberg", 3), 2) == heisenberg_chi_square(3, 2)

    def test_mixing_time_scaling(self):
        small, large = affine_mixing_time(11), affine_mixing_time(23)
        assert 20 <= small <= 60
        assert 2.0 <= large / small <= 8.0
        assert affine_chi_square_bound(11, small).chi_square <= 0.04
        assert affine_chi_square_bound(11, small - 1).chi_square > 0.04

    def test_requires_prime(self):
        with pytest.raises(DomainError):
            heisenberg_chi_square(9, 1)


class TestDistanceCurve:
    def test_columns_and_bounds(self):
        curve = distance_curve("affine", 7, 10)
        assert list(curve.columns) == ["k", "chi_square", "tv_exact", "tv_upper_bound"]
        assert list(curve["k"]) == list(range(1, 11))
        assert np.all(curve["tv_exact"] <= curve["tv_upper_bound"] + 1e-12)
        assert np.all(np.diff(curve["chi_square"]) <= 0)

    def test_large_groups_skip_brute_force(self, monkeypatch):
        monkeypatch.setattr(settings, "brute_force_max_order", 10)
        curve = distance_curve("heisenberg", 3, 3)
        assert curve["tv_exact"].isna().all()
        assert curve["chi_square"].notna().all()
