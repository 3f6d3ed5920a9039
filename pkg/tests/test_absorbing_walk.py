from math import isqrt

import numpy as np
import pytest

from harper.config import settings
from harper.exceptions import DomainError, InsufficientDataError, SimulationCapError
from harper.models import KillRates
from harper.spectral.core import build_harper, harper_spectrum
from harper.walks.absorbing import (
    CHAIN_NEIGHBOR_RATE,
    CLOCK_FACTOR,
    build_absorbing,
    build_substochastic,
    dirichlet_spectrum,
    estimate_lambda_star,
    expected_local_times,
    f_b,
    g_b,
    g_b_limit,
    harper_kill_rates,
    harper_lambda_star_exact,
    hitting_time_mgf_rates,
    hitting_time_moments,
    linearized_g_b_limit,
    min_pair_rates,
    simulate_death_times,
    simulate_exit_batch,
    simulate_killed_walk,
    sorted_rates,
    survival_bound_check,
)


def free_rates(n):
    return KillRates(u=np.zeros(n))


def assert_within_standard_errors(sample, target, width=3.0):
    sample = np.asarray(sample, dtype=float)
    error = sample.std(ddof=1) / np.sqrt(sample.size)
    assert abs(sample.mean() - target) <= width * error, f"{sample.mean()} vs {target} (se {error})"


class TestChain:
    def test_substochastic_rows(self):
        n = 16
        Mp = build_substochastic(build_harper(n, 1))
        deficit = 1.0 - Mp.entries.sum(axis=1)
        np.testing.assert_allclose(deficit, harper_kill_rates(n).u, atol=1e-15)
        assert Mp.entries[0, 1] == pytest.approx(CHAIN_NEIGHBOR_RATE)

    def test_absorbing_chain_is_stochastic(self):
        chain = build_absorbing(build_substochastic(build_harper(12, 1)))
        np.testing.assert_allclose(chain.entries.sum(axis=1), 1.0, atol=1e-14)
        assert chain.entries[0, 0] == 1.0

    def test_dirichlet_spectrum_is_affine_image(self):
        n = 64
        chain = build_absorbing(build_substochastic(build_harper(n, 1)))
        spectrum = dirichlet_spectrum(chain)
        np.testing.assert_allclose(spectrum.eigenvalues, 1.0 / 3.0 + 2.0 * harper_spectrum(n) / 3.0, atol=1e-10)
        assert harper_lambda_star_exact(n) == pytest.approx(1.0 - spectrum.eigenvalues[0], abs=1e-12)

    def test_walk_clock_rates(self):
        n = 32
        walk = harper_kill_rates(n).rescaled(CLOCK_FACTOR)
        np.testing.assert_allclose(walk.u, 2.0 * (1.0 - np.cos(2 * np.pi * np.arange(n) / n)), atol=1e-14)

    def test_negative_rates_rejected(self):
        with pytest.raises(DomainError):
            KillRates(u=[0.0, -1.0, 0.0])


class TestRateVectors:
    def test_min_pair_rates(self):
        rates = KillRates(u=[0.0, 1.0, 2.0, 3.0, 4.0, 5.0])
        np.testing.assert_allclose(min_pair_rates(rates, 0, 2), [0.0, 1.0, 2.0])
        np.testing.assert_allclose(min_pair_rates(rates, 3, 2), [3.0, 2.0, 1.0])

    def test_sorted_rates(self):
        rates = KillRates(u=[3.0, 0.0, 2.0, 1.0, 4.0])
        np.testing.assert_allclose(sorted_rates(rates, 2), [0.0, 1.0, 2.0])

    def test_sorted_rates_need_the_window_to_fit(self):
        rates = harper_kill_rates(8)
        assert len(sorted_rates(rates, 3)) == 4
        with pytest.raises(DomainError):
            sorted_rates(rates, 4)
        with pytest.raises(DomainError):
            sorted_rates(rates, 20)

    @pytest.mark.parametrize("n,start", [(9, 0), (9, 4), (64, 0), (64, 17)])
    def test_sorted_rates_bound_paired_rates(self, n, start):
        rates = harper_kill_rates(n).rescaled(CLOCK_FACTOR)
        b = (n - 1) // 2
        paired = np.sort(min_pair_rates(rates, start, b))
        assert np.all(sorted_rates(rates, b) <= paired + 1e-15)
        assert g_b(min_pair_rates(rates, start, b)) <= g_b(sorted_rates(rates, b))

    def test_survival_check_rejects_wide_window(self):
        rates = harper_kill_rates(8).rescaled(CLOCK_FACTOR)
        with pytest.raises(DomainError):
            survival_bound_check(8, rates, 20, 1000, seed=0)


class TestFunctionals:
    def test_zero_rates_give_one(self):
        assert f_b(np.zeros(5)) == 1.0
        assert g_b(np.zeros(5)) == 1.0

    def test_small_cases(self):
        assert f_b([1.0]) == pytest.approx(2.0 / 3.0)
        assert f_b([0.0, 1.0]) == pytest.approx(3.0 ** -0.5)
        assert g_b([0.0, 1.0]) == pytest.approx(2.0 ** -0.5)

    def test_negative_coordinates(self):
        with pytest.raises(DomainError):
            g_b([0.1, -0.1])

    @pytest.mark.parametrize("size", [1, 2, 5, 30])
    def test_f_below_g(self, rng, size):
        for _ in range(50):
            v = rng.exponential(size=size) * rng.choice([1e-3, 1.0, 10.0])
            assert f_b(v) <= g_b(v) * (1 + 1e-12)

    def test_g_decreases_under_larger_rates(self, rng):
        for _ in range(50):
            v = rng.exponential(size=12)
            larger = v + rng.exponential(size=12)
            assert g_b(larger) < g_b(v)
            assert g_b(2 * v) <= g_b(v)

    def test_sorting_raises_g(self, rng):
        for _ in range(50):
            v = rng.exponential(size=10)
            assert g_b(v) <= g_b(np.sort(v)) * (1 + 1e-12)

    def test_limit_values(self):
        assert linearized_g_b_limit() == pytest.approx(np.exp(-np.pi ** 2 / 24))
        assert linearized_g_b_limit() < g_b_limit() < 0.75

    def test_harper_g_b_limit(self):
        n = 10 ** 6
        value = g_b(sorted_rates(harper_kill_rates(n).rescaled(CLOCK_FACTOR), isqrt(n)))
        assert abs(value - g_b_limit()) <= 0.02
        assert value >= linearized_g_b_limit()


class TestExitLaw:
    @pytest.mark.parametrize("b", [0, 1, 5, 20])
    def test_stage_means_sum(self, b):
        means = 1.0 / hitting_time_mgf_rates(b)
        assert means.sum() == pytest.approx((b + 1) ** 2 / 2)

    def test_moments(self):
        moments = hitting_time_moments(20)
        assert moments["mean_steps"] == 441
        assert moments["mean"] == pytest.approx(220.5)
        assert moments["variance"] > 0

    def test_expected_local_times(self):
        np.testing.assert_allclose(expected_local_times(3), [2.0, 3.0, 2.0, 1.0])
        assert expected_local_times(20).sum() == pytest.approx(hitting_time_moments(20)["mean"])


class TestSimulation:
    def test_single_trace_exits(self):
        n, b = 64, 5
        trace = simulate_killed_walk(n, free_rates(n), b, rng_seed=3)
        assert not trace.absorbed
        assert trace.tau_b == pytest.approx(trace.tau)
        assert abs(int(trace.states[-1]) - trace.start) == b + 1
        assert np.all(np.abs(np.diff(trace.states)) == 1)
        assert trace.tau == pytest.approx(trace.holding_times.sum())

    def test_single_trace_reproducible(self):
        n = 32
        rates = harper_kill_rates(n).rescaled(CLOCK_FACTOR)
        first = simulate_killed_walk(n, rates, 4, rng_seed=11, start=7)
        second = simulate_killed_walk(n, rates, 4, rng_seed=11, start=7)
        np.testing.assert_array_equal(first.states, second.states)
        np.testing.assert_array_equal(first.holding_times, second.holding_times)

    def test_heavy_killing_absorbs(self):
        n = 16
        trace = simulate_killed_walk(n, KillRates(u=np.full(n, 1e6)), 3, rng_seed=0)
        assert trace.absorbed
        assert trace.tau_b is None

    def test_bad_start(self):
        with pytest.raises(DomainError):
            simulate_killed_walk(8, free_rates(8), 2, rng_seed=0, start=8)

    def test_negative_seed(self):
        with pytest.raises(DomainError):
            simulate_exit_batch(8, free_rates(8), 2, 10, seed=-1)

    def test_step_parity(self):
        b = 6
        sample = simulate_exit_batch(32, free_rates(32), b, 500, seed=1)
        assert np.all(sample.steps % 2 == (b + 1) % 2)
        assert not sample.absorbed.any()

    def test_independent_of_worker_count(self, monkeypatch):
        monkeypatch.setattr(settings, "simulation_chunk_size", 1000)
        n = 64
        rates = harper_kill_rates(n).rescaled(CLOCK_FACTOR)
        serial = simulate_exit_batch(n, rates, 8, 3000, seed=5, n_jobs=1)
        parallel = simulate_exit_batch(n, rates, 8, 3000, seed=5, n_jobs=2)
        np.testing.assert_array_equal(serial.tau, parallel.tau)
        np.testing.assert_array_equal(serial.local_times, parallel.local_times)

    def test_time_cap(self, monkeypatch):
        monkeypatch.setattr(settings, "simulation_time_cap", 1.0)
        with pytest.raises(SimulationCapError):
            simulate_exit_batch(256, free_rates(256), 50, 100, seed=0)

    def test_death_times_respect_horizon(self):
        deaths = simulate_death_times(32, harper_kill_rates(32).rescaled(CLOCK_FACTOR), 500, 2.0, seed=0)
        finite = deaths[np.isfinite(deaths)]
        assert np.all(finite <= 2.0)
        assert np.isinf(deaths).any()

    def test_small_exit_laws(self):
        b = 10
        sample = simulate_exit_batch(64, free_rates(64), b, 4000, seed=0)
        moments = hitting_time_moments(b)
        assert_within_standard_errors(sample.steps, moments["mean_steps"])
        assert_within_standard_errors(sample.tau, moments["mean"])
        assert_within_standard_errors(sample.local_times[:, 0], (b + 1) / 2)

    @pytest.mark.slow
    def test_exit_laws(self):
        b, trials = 20, 10_000
        sample = simulate_exit_batch(84, free_rates(84), b, trials, seed=0)
        moments = hitting_time_moments(b)
        assert_within_standard_errors(sample.steps, 441)
        assert_within_standard_errors(sample.tau, moments["mean"])
        expected = expected_local_times(b)
        for y in (0, 1, 10, 20):
            assert_within_standard_errors(sample.local_times[:, y], expected[y])
        centred = sample.tau - sample.tau.mean()
        variance = np.mean(centred ** 2)
        error = np.sqrt(np.mean(centred ** 4) - variance ** 2) / np.sqrt(trials)
        assert abs(variance - moments["variance"]) <= 3 * error


class TestSurvivalAndDecay:
    def test_survival_needs_trials(self):
        with pytest.raises(DomainError):
            survival_bound_check(64, harper_kill_rates(64), 4, 100, seed=0)

    def test_survival_report(self):
        n, b = 64, 4
        report = survival_bound_check(n, harper_kill_rates(n).rescaled(CLOCK_FACTOR), b, 2000, seed=0)
        assert 0.0 <= report.survival <= 1.0
        assert report.survival <= report.g_b + 3 * report.standard_error
        assert report.f_b <= report.g_b

    def test_doubled_rates_do_not_raise_survival(self):
        n, b = 64, 6
        rates = harper_kill_rates(n).rescaled(CLOCK_FACTOR)
        base = survival_bound_check(n, rates, b, 4000, seed=2)
        doubled = survival_bound_check(n, rates.rescaled(2.0), b, 4000, seed=2)
        spread = np.hypot(base.standard_error, doubled.standard_error)
        assert doubled.survival <= base.survival + 3 * spread
        assert doubled.g_b <= base.g_b

    def test_free_walk_always_survives(self):
        report = survival_bound_check(32, free_rates(32), 5, 1000, seed=0)
        assert report.survival == 1.0
        assert report.g_b == 1.0

    def test_constant_rate_decay(self):
        n, c = 16, 0.5
        report = estimate_lambda_star(n, KillRates(u=np.full(n, c)), 40_000, 6.0, seed=4)
        assert report.lambda_star_estimate == pytest.approx(c, rel=0.05)

    @pytest.mark.slow
    def test_decay_rate_scales_with_n(self):
        estimates = {}
        for n in (64, 256):
            exact = harper_lambda_star_exact(n)
            horizon = 1.5 * np.log(10.0) / exact
            report = estimate_lambda_star(
                n, harper_kill_rates(n), 10_000, horizon, seed=0, jump_rate=CHAIN_NEIGHBOR_RATE
            )
            estimates[n] = report.lambda_star_estimate
        assert 2.0 <= estimates[64] / estimates[256] <= 8.0

    @pytest.mark.slow
    def test_survival_bound(self):
        n, b = 256, 16
        report = survival_bound_check(n, harper_kill_rates(n).rescaled(CLOCK_FACTOR), b, 10_000, seed=0)
        assert report.survival <= report.g_b + 3 * report.standard_error

    def test_insufficient_survivors(self):
        n = 64
        exact = harper_lambda_star_exact(n)
        with pytest.raises(InsufficientDataError):
            estimate_lambda_star(n, harper_kill_rates(n), 200, 20.0 / exact, seed=0, jump_rate=CHAIN_NEIGHBOR_RATE)

    @pytest.mark.slow
    def test_decay_rate(self):
        n = 64
        exact = harper_lambda_star_exact(n)
        report = estimate_lambda_star(
            n, harper_kill_rates(n), 20_000, 1.5 * np.log(10.0) / exact, seed=0, jump_rate=CHAIN_NEIGHBOR_RATE
        )
        assert report.lambda_star_estimate == pytest.approx(exact, rel=0.15)
        assert report.clock_factor == pytest.approx(1.0)
