"""Reduced-scale end-to-end checks.

Each check runs one pipeline at the smallest size that still separates a
correct implementation from a broken one, and reports pass/fail with a
short numeric detail. The suite runs single-threaded in a few minutes; the
two n = 4096 eigensolves dominate.
"""
import logging
import time
from math import isqrt
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np
from scipy import integrate

from harper.bulk.density import (
    DensityCurve,
    elliptic_k,
    f2_density,
    figure1_data,
    harper_empirical_measure,
    wasserstein2,
    wasserstein2_empirical,
)
from harper.exceptions import DomainError
from harper.models import CheckResult, KillRates
from harper.spectral.bounds import theorem1_bound
from harper.spectral.core import build_harper, harper_spectrum
from harper.spectral.oscillator import (
    conjugated_harper,
    convergence_table,
    quadratic_form_direct,
    quadratic_form_spectral,
)
from harper.walks.absorbing import (
    CHAIN_NEIGHBOR_RATE,
    CLOCK_FACTOR,
    estimate_lambda_star,
    expected_local_times,
    g_b,
    g_b_limit,
    harper_kill_rates,
    harper_lambda_star_exact,
    hitting_time_moments,
    linearized_g_b_limit,
    simulate_exit_batch,
    sorted_rates,
    survival_bound_check,
)
from harper.walks.groups import (
    affine_chi_square_bound,
    affine_mixing_time,
    brute_force_chi_square,
    convolve,
    heisenberg_chi_square,
    heisenberg_irreps,
    make_group,
    step_distribution,
)

logger = logging.getLogger(__name__)

Outcome = Tuple[bool, str]

# command -> operations it drives
COVERAGE: Dict[str, List[str]] = {
    "spectrum": [
        "spectral.core.build_harper",
        "spectral.core.build_affine_transform",
        "spectral.core.build_mp3_diagonal",
        "spectral.core.dense_hermitian_eigen",
        "spectral.core.spectrum_table",
        "spectral.core.matrix_table",
    ],
    "bound": [
        "spectral.bounds.theorem1_bound",
        "spectral.bounds.improved_bound",
        "spectral.bounds.smallest_eigenvalue_bound",
        "spectral.bounds.optimize_bound",
    ],
    "oscillator": [
        "spectral.oscillator.convergence_table",
        "spectral.oscillator.mu_k",
        "spectral.core.extreme_eigenvalues",
    ],
    "absorb": [
        "walks.absorbing.harper_kill_rates",
        "walks.absorbing.survival_bound_check",
        "walks.absorbing.simulate_exit_batch",
        "walks.absorbing.g_b",
        "walks.absorbing.estimate_lambda_star",
        "walks.absorbing.harper_lambda_star_exact",
        "walks.absorbing.simulate_killed_walk",
    ],
    "walk": [
        "walks.groups.distance_curve",
        "walks.groups.heisenberg_chi_square",
        "walks.groups.affine_chi_square_bound",
        "walks.groups.affine_mixing_time",
        "walks.groups.convolve",
    ],
    "bulk": [
        "bulk.density.harper_empirical_measure",
        "bulk.density.figure1_data",
        "bulk.density.f2_density",
        "bulk.density.wasserstein2",
        "bulk.density.DensityCurve",
    ],
    "self-test": ["selftest.self_test"],
}


def _relative(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def _within(value: float, target: float, error: float, width: float = 3.0) -> bool:
    return abs(value - target) <= width * error


# Checks
def check_theorem1_bound() -> Outcome:
    n = 101
    M = build_harper(n, 1)
    k = int(np.floor(np.sqrt(n) / 2))
    report = theorem1_bound(M.circulant, M.diagonal, k, k)
    top = harper_spectrum(n)[0]
    return top <= report.bound <= 1.0 - 0.04 / n, f"lambda_1={top:.8f} bound={report.bound:.8f}"


def check_oscillator_convergence() -> Outcome:
    sizes = (250, 500, 1000, 2000)
    table = convergence_table(sizes, (1, 2, 3), n_jobs=1)
    errors = table[table["end"] == "top"].pivot(index="n", columns="k", values="abs_error").sort_index()
    monotone = bool(np.all(np.diff(errors.to_numpy(), axis=0) < 0))
    worst = float(errors.loc[sizes[-1]].max())
    return monotone and worst <= 0.25, f"max error at n={sizes[-1]}: {worst:.4f}, monotone={monotone}"


def check_quadratic_form_identity() -> Outcome:
    rng = np.random.default_rng(0)
    worst = 0.0
    for n in (16, 101, 256):
        for _ in range(100):
            u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            worst = max(worst, _relative(quadratic_form_direct(u, n), quadratic_form_spectral(u, n)))
    return worst <= 1e-9, f"worst relative gap {worst:.2e}"


def check_even_negation() -> Outcome:
    defect, mirror = 0.0, 0.0
    for n in (8, 64, 256):
        M = build_harper(n, 1).to_dense()
        defect = max(defect, float(np.max(np.abs(conjugated_harper(n) + M))))
        spectrum = harper_spectrum(n)
        mirror = max(mirror, float(np.max(np.abs(spectrum + spectrum[::-1]))))
    return defect <= 1e-12 and mirror <= 1e-10, f"|UMU* + M| = {defect:.1e}, spectrum asymmetry {mirror:.1e}"


def check_g_b_limit() -> Outcome:
    n = 10 ** 6
    b = isqrt(n)
    value = g_b(sorted_rates(harper_kill_rates(n).rescaled(CLOCK_FACTOR), b))
    limit, floor = g_b_limit(), linearized_g_b_limit()
    return abs(value - limit) <= 0.02 and value >= floor, f"G_b={value:.4f} limit={limit:.4f} floor={floor:.4f}"


def check_hitting_laws() -> Outcome:
    b, trials = 20, 10_000
    n = 4 * (b + 1)
    sample = simulate_exit_batch(n, KillRates(u=np.zeros(n)), b, trials, seed=0, n_jobs=1)
    moments = hitting_time_moments(b)
    root = np.sqrt(trials)
    failures = []

    steps = sample.steps.astype(float)
    if not _within(steps.mean(), moments["mean_steps"], steps.std(ddof=1) / root):
        failures.append(f"steps {steps.mean():.2f}")
    tau = sample.tau
    if not _within(tau.mean(), moments["mean"], tau.std(ddof=1) / root):
        failures.append(f"mean tau {tau.mean():.2f}")
    centred = tau - tau.mean()
    variance = float(np.mean(centred ** 2))
    variance_error = np.sqrt(max(np.mean(centred ** 4) - variance ** 2, 0.0)) / root
    if not _within(variance, moments["variance"], variance_error):
        failures.append(f"variance {variance:.1f}")
    expected = expected_local_times(b)
    for y in (0, 1, 10, 20):
        column = sample.local_times[:, y]
        if not _within(column.mean(), expected[y], column.std(ddof=1) / root):
            failures.append(f"L_{y} {column.mean():.3f}")
    detail = "; ".join(failures) if failures else f"mean steps {steps.mean():.2f} vs {moments['mean_steps']:.0f}"
    return not failures, detail


def check_survival_bound() -> Outcome:
    n, b = 256, 16
    report = survival_bound_check(n, harper_kill_rates(n).rescaled(CLOCK_FACTOR), b, 10_000, 0, n_jobs=1)
    limit = report.g_b + 3 * report.standard_error
    return report.survival <= limit, f"survival {report.survival:.4f} <= G_b {report.g_b:.4f} + 3 se"


def check_decay_rate() -> Outcome:
    n = 64
    exact = harper_lambda_star_exact(n)
    horizon = 1.5 * np.log(10.0) / exact
    report = estimate_lambda_star(
        n, harper_kill_rates(n), 20_000, horizon, 0, jump_rate=CHAIN_NEIGHBOR_RATE, n_jobs=1
    )
    identity = abs((1.0 - exact) - (1.0 / 3.0 + 2.0 * harper_spectrum(n)[0] / 3.0))
    error = _relative(report.lambda_star_estimate, exact)
    return error <= 0.15 and identity <= 1e-10, f"estimate {report.lambda_star_estimate:.5f} vs {exact:.5f}"


def _brute_force_agreement(name: str, modulus: int, k_max: int, closed_form: Callable[[int, int], float]) -> float:
    group = make_group(name, modulus)
    Q = step_distribution(group)
    current, worst = Q, 0.0
    for k in range(1, k_max + 1):
        worst = max(worst, _relative(closed_form(modulus, k), brute_force_chi_square(current)))
        current = convolve(current, Q)
    return worst


def check_heisenberg_plancherel() -> Outcome:
    worst = max(_brute_force_agreement("heisenberg", p, 6, heisenberg_chi_square) for p in (3, 5))
    complete = all(len(heisenberg_irreps(p).irreps) == p * p + p - 1 for p in (3, 5))
    return worst <= 1e-8 and complete, f"worst relative gap {worst:.1e}"


def check_affine_mixing() -> Outcome:
    def closed(p, k):
        return affine_chi_square_bound(p, k).chi_square

    worst = max(_brute_force_agreement("affine", p, 8, closed) for p in (5, 7))
    small, large = affine_mixing_time(11), affine_mixing_time(23)
    ratio = large / small
    return worst <= 1e-8 and 2.0 <= ratio <= 8.0, f"gap {worst:.1e}, k(11)={small}, k(23)={large}"


def check_bulk_spectrum() -> Outcome:
    n = 4096
    curve = DensityCurve()
    emp = harper_empirical_measure(n, 1)
    distance = wasserstein2(emp, curve)
    edge = np.asarray(f2_density(np.array([-0.99, 0.99])))
    histogram = figure1_data(n, 1, 100, emp=emp)
    mids = (0.5 * (histogram["bin_left"] + histogram["bin_right"])).abs()
    away = histogram[(mids >= 0.1) & (mids <= 0.9)]
    bin_error = float(np.max(np.abs(away["empirical_density"] - away["f2_at_midpoint"])))
    frequencies = wasserstein2_empirical(emp, harper_empirical_measure(n, 7))
    passed = (
        distance <= 0.05
        and bool(np.all(np.abs(edge - 0.32) <= 0.02))
        and bin_error <= 0.05
        and frequencies <= 0.02
    )
    return passed, f"W2={distance:.4f} f2(0.99)={edge[1]:.4f} bin error={bin_error:.4f} W2(a=1,7)={frequencies:.4f}"


def check_special_functions() -> Outcome:
    at_zero = abs(elliptic_k(0.0) - np.pi / 2)
    worst = 0.0
    for m in (0.3, 0.5, 0.9):
        reference, _ = integrate.quad(
            lambda t: 1.0 / np.sqrt((1.0 + t) * (1.0 - m * m * t * t)),
            0.0, 1.0, weight="alg", wvar=(0.0, -0.5), epsabs=1e-14, epsrel=1e-13,
        )
        worst = max(worst, _relative(elliptic_k(m), reference))
    mass = DensityCurve().total_mass
    passed = at_zero <= 1e-12 and worst <= 1e-9 and abs(mass - 1.0) <= 1e-6
    return passed, f"|K(0) - pi/2| = {at_zero:.1e}, AGM vs quadrature {worst:.1e}, mass {mass:.8f}"


CHECKS: Dict[str, Callable[[], Outcome]] = {
    "theorem1-bound": check_theorem1_bound,
    "oscillator-convergence": check_oscillator_convergence,
    "quadratic-form-identity": check_quadratic_form_identity,
    "even-negation": check_even_negation,
    "g-b-limit": check_g_b_limit,
    "hitting-laws": check_hitting_laws,
    "survival-bound": check_survival_bound,
    "decay-rate": check_decay_rate,
    "heisenberg-plancherel": check_heisenberg_plancherel,
    "affine-mixing": check_affine_mixing,
    "bulk-spectrum": check_bulk_spectrum,
    "special-functions": check_special_functions,
}


def self_test(only: Optional[Iterable[str]] = None) -> List[CheckResult]:
    names = list(only) if only else list(CHECKS)
    unknown = [name for name in names if name not in CHECKS]
    if unknown:
        raise DomainError(f"unknown checks: {', '.join(unknown)}")

    results = []
    for name in names:
        started = time.perf_counter()
        try:
            passed, detail = CHECKS[name]()
        except Exception as e:
            logger.error(f"check {name} raised: {e}")
            passed, detail = False, f"{type(e).__name__}: {e}"
        elapsed = time.perf_counter() - started
        logger.info(f"{name}: {'pass' if passed else 'FAIL'} in {elapsed:.1f}s")
        results.append(CheckResult(name=name, passed=bool(passed), detail=detail, seconds=elapsed))
    return results
