"""Killed random walks and the absorbing chain behind the Harper matrix.

M' = I/3 + 2M/3 is substochastic; adding a cemetery state gives an absorbing
chain whose Dirichlet spectrum is the spectrum of M'. Read in continuous
time, M' is a nearest-neighbour walk on Z/nZ that jumps to each neighbour at
rate 1/6 and dies at site x at rate u_x = (1 - cos(2 pi a x / n)) / 3.

The simulator runs the walk at rate ``jump_rate`` per neighbour (1 by
default). Multiplying rates by CLOCK_FACTOR = 6 converts the chain clock to
the unit-rate walk clock and divides every time by 6.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np
from scipy import integrate

from harper.config import settings
from harper.exceptions import DomainError, InsufficientDataError, SimulationCapError
from harper.models import (
    AbsorbingChain,
    CirculantPlusDiagonal,
    ExitSample,
    KillRates,
    LambdaStarReport,
    Spectrum,
    SubstochasticMatrix,
    SurvivalReport,
    WalkTrace,
)
from harper.spectral.core import build_harper, dense_hermitian_eigen
from harper.utils.parallel import check_seed, parallel_map, substream

logger = logging.getLogger(__name__)

CHAIN_NEIGHBOR_RATE = 1.0 / 6.0
CLOCK_FACTOR = 1.0 / CHAIN_NEIGHBOR_RATE
HARPER_G_SCALE = np.pi ** 2 / 2  # walk-clock Harper rates
MIN_SURVIVORS = 100
MIN_SURVIVAL_TRIALS = 1000


# Chain construction
def build_substochastic(M: CirculantPlusDiagonal) -> SubstochasticMatrix:
    """M' = I/3 + 2M/3"""
    dense = M.to_dense()
    if np.iscomplexobj(dense):
        raise DomainError("substochastic transform needs a real matrix")
    entries = np.eye(M.n) / 3.0 + 2.0 * dense / 3.0
    if np.any(entries < -1e-15):
        raise DomainError("I/3 + 2M/3 has negative entries")
    return SubstochasticMatrix(entries=np.clip(entries, 0.0, None))


def build_absorbing(Mp: SubstochasticMatrix) -> AbsorbingChain:
    """(n+1)x(n+1) stochastic matrix, state 0 absorbing, a_i = 1 - sum_j M'(i, j)"""
    n = Mp.n
    entries = np.zeros((n + 1, n + 1))
    entries[0, 0] = 1.0
    entries[1:, 1:] = Mp.entries
    entries[1:, 0] = np.clip(1.0 - Mp.entries.sum(axis=1), 0.0, None)
    return AbsorbingChain(entries=entries)


def dirichlet_spectrum(chain: AbsorbingChain) -> Spectrum:
    """Spectrum on functions vanishing at the absorbing state"""
    return dense_hermitian_eigen(chain.entries[1:, 1:], with_vectors=False)


def harper_kill_rates(n: int, a: int = 1) -> KillRates:
    """Chain-clock killing rates u_x = (1 - cos(2 pi a x / n)) / 3"""
    if n < 3:
        raise DomainError(f"kill rates need n >= 3, got {n}")
    x = np.arange(n)
    return KillRates(u=(1.0 - np.cos(2 * np.pi * a * x / n)) / 3.0)


def min_pair_rates(rates: KillRates, start: int, b: int) -> np.ndarray:
    """v_0 = u_start, v_k = min(u_{start-k}, u_{start+k}) for k = 1..b"""
    n = rates.n
    k = np.arange(b + 1)
    return np.minimum(rates.u[(start - k) % n], rates.u[(start + k) % n])


def sorted_rates(rates: KillRates, b: int) -> np.ndarray:
    """The b+1 smallest rates in nondecreasing order.

    The window [start-b, start+b] must not wrap around the ring (2b+1 <= n);
    past that the paired sites repeat and the smallest rates stop bounding
    min_pair_rates from below.
    """
    if b < 0:
        raise DomainError("b must be >= 0")
    if 2 * b + 1 > rates.n:
        raise DomainError(f"exit window 2b+1 = {2 * b + 1} does not fit on {rates.n} sites")
    return np.sort(rates.u)[: b + 1]


# Simulation engine
def _simulate_chunk(
    u: np.ndarray,
    start: int,
    jump_rate: float,
    trials: int,
    rng: np.random.Generator,
    b: Optional[int] = None,
    horizon: Optional[float] = None,
    record: bool = False,
):
    """Run `trials` walks until killed, until |displacement| = b+1, or until the horizon.

    Returns (end_time, steps, absorbed, local_times, path) where local_times is
    trials x (b+1) indexed by |displacement| and path lists (displacement,
    holding time) pairs of trial 0 when recording.
    """
    n = u.shape[0]
    time_cap = settings.simulation_time_cap
    disp = np.zeros(trials, dtype=np.int64)
    clock = np.zeros(trials)
    steps = np.zeros(trials, dtype=np.int64)
    absorbed = np.zeros(trials, dtype=bool)
    end_time = np.full(trials, np.inf)
    local = np.zeros((trials, b + 1)) if b is not None else None
    path: List[Tuple[int, float]] = []
    active = np.arange(trials)

    while active.size:
        site = (start + disp[active]) % n
        kill = u[site]
        total = 2.0 * jump_rate + kill
        hold = rng.standard_exponential(active.size) / total
        pick = rng.random(active.size) * total

        if horizon is not None:
            survives = clock[active] + hold > horizon
            if survives.any():
                clock[active[survives]] = horizon
                keep = ~survives
                active, site, kill, hold, pick = active[keep], site[keep], kill[keep], hold[keep], pick[keep]
                if not active.size:
                    break

        if record and active.size and active[0] == 0:
            path.append((int(disp[0]), float(hold[0])))
        if local is not None:
            np.add.at(local, (active, np.abs(disp[active])), hold)
        clock[active] += hold

        killed = pick < kill
        step = np.where(pick - kill < jump_rate, -1, 1)
        moving = active[~killed]
        disp[moving] += step[~killed]
        steps[moving] += 1
        absorbed[active[killed]] = True
        end_time[active[killed]] = clock[active[killed]]

        done = killed.copy()
        if b is not None:
            exited = np.zeros_like(killed)
            exited[~killed] = np.abs(disp[moving]) == b + 1
            end_time[active[exited]] = clock[active[exited]]
            if record and exited[0] and active[0] == 0:
                path.append((int(disp[0]), 0.0))
            done |= exited
        active = active[~done]
        if active.size and clock[active].max() > time_cap:
            raise SimulationCapError(f"walk exceeded the time cap {time_cap:g} without finishing")

    if horizon is None:
        finished = np.isfinite(end_time)
        if not finished.all():
            raise SimulationCapError("walk ended without absorption or exit")
    return end_time, steps, absorbed, local, path


def _chunks(trials: int) -> List[Tuple[int, int]]:
    size = settings.simulation_chunk_size
    return [(index, min(size, trials - offset)) for index, offset in enumerate(range(0, trials, size))]


def _check_walk(rates: KillRates, n: int, start: int, b: Optional[int], jump_rate: float):
    if rates.n != n:
        raise DomainError(f"rates have length {rates.n}, expected {n}")
    if not 0 <= start < n:
        raise DomainError(f"start must lie in [0, {n - 1}]")
    if b is not None and b < 0:
        raise DomainError("b must be >= 0")
    if jump_rate <= 0:
        raise DomainError("jump rate must be positive")


def simulate_killed_walk(
    n: int,
    rates: KillRates,
    b: int,
    rng_seed: int,
    start: int = 0,
    jump_rate: float = 1.0,
) -> WalkTrace:
    """One trajectory, stopped at absorption or at the first exit from [start-b, start+b]"""
    _check_walk(rates, n, start, b, jump_rate)
    rng = substream(check_seed(rng_seed), 0)
    end_time, _, absorbed, _, path = _simulate_chunk(rates.u, start, jump_rate, 1, rng, b=b, record=True)
    displacements = np.array([d for d, _ in path], dtype=np.int64)
    holds = np.array([h for _, h in path])
    local_times = {}
    for d, h in path:
        local_times[d] = local_times.get(d, 0.0) + h
    tau = float(end_time[0])
    return WalkTrace(
        start=start,
        states=start + displacements,
        holding_times=holds,
        absorbed=bool(absorbed[0]),
        tau=tau,
        tau_b=None if absorbed[0] else tau,
        local_times=local_times,
    )


def simulate_exit_batch(
    n: int,
    rates: KillRates,
    b: int,
    trials: int,
    seed: int,
    start: int = 0,
    jump_rate: float = 1.0,
    n_jobs: Optional[int] = None,
) -> ExitSample:
    _check_walk(rates, n, start, b, jump_rate)
    seed = check_seed(seed)

    def run(chunk):
        index, size = chunk
        return _simulate_chunk(rates.u, start, jump_rate, size, substream(seed, index), b=b)[:4]

    results = parallel_map(run, _chunks(trials), n_jobs=n_jobs)
    logger.info(f"simulated {trials} exit runs (n={n}, b={b}, seed={seed})")
    return ExitSample(
        b=b,
        tau=np.concatenate([r[0] for r in results]),
        steps=np.concatenate([r[1] for r in results]),
        absorbed=np.concatenate([r[2] for r in results]),
        local_times=np.concatenate([r[3] for r in results]),
    )


def simulate_death_times(
    n: int,
    rates: KillRates,
    trials: int,
    horizon: float,
    seed: int,
    start: int = 0,
    jump_rate: float = 1.0,
    n_jobs: Optional[int] = None,
) -> np.ndarray:
    """Killing times, +inf for walks alive at the horizon"""
    _check_walk(rates, n, start, None, jump_rate)
    seed = check_seed(seed)

    def run(chunk):
        index, size = chunk
        return _simulate_chunk(rates.u, start, jump_rate, size, substream(seed, index), horizon=horizon)[0]

    return np.concatenate(parallel_map(run, _chunks(trials), n_jobs=n_jobs))


# Local-time functionals
def _nonnegative(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise DomainError("expected a nonempty vector")
    if np.any(v < 0):
        raise DomainError("F_b and G_b need nonnegative coordinates")
    return v


def f_b(v) -> float:
    v = _nonnegative(v)
    m = v.size  # b + 1
    weights = m * (m - np.arange(m)).astype(float)
    weights[0] = m * m / 2.0
    return float(np.exp(-np.sum(np.log1p(weights * v)) / m))


def g_b(v) -> float:
    v = _nonnegative(v)
    m = v.size
    weights = m * (m - np.arange(m)) / 2.0
    return float(np.exp(-np.sum(np.log1p(weights * v)) / m))


def g_b_limit(scale: float = HARPER_G_SCALE) -> float:
    """Limit of G_b(sorted rates) at b ~ sqrt(n): exp(-int_0^1 log(1 + scale y^2 (1-y)) dy)"""
    value, _ = integrate.quad(lambda y: np.log1p(scale * y ** 2 * (1 - y)), 0.0, 1.0, epsabs=1e-13)
    return float(np.exp(-value))


def linearized_g_b_limit(scale: float = HARPER_G_SCALE) -> float:
    """First-order value exp(-scale/12); exp(-pi^2/24) for the Harper rates"""
    return float(np.exp(-scale / 12.0))


def survival_bound_check(
    n: int,
    rates: KillRates,
    b: int,
    trials: int,
    seed: int,
    start: int = 0,
    jump_rate: float = 1.0,
    n_jobs: Optional[int] = None,
) -> SurvivalReport:
    """Monte-Carlo P(tau > tau_b) next to F_b on paired rates and G_b on the sorted rates"""
    if trials < MIN_SURVIVAL_TRIALS:
        raise DomainError(f"survival check needs at least {MIN_SURVIVAL_TRIALS} trials")
    bound = g_b(sorted_rates(rates, b))
    sample = simulate_exit_batch(n, rates, b, trials, seed, start=start, jump_rate=jump_rate, n_jobs=n_jobs)
    survival = float(np.mean(~sample.absorbed))
    return SurvivalReport(
        n=n,
        b=b,
        trials=trials,
        seed=seed,
        start=start,
        survival=survival,
        standard_error=float(np.sqrt(survival * (1 - survival) / trials)),
        f_b=f_b(min_pair_rates(rates, start, b)),
        g_b=bound,
    )


# Exit-time law
def hitting_time_mgf_rates(b: int) -> np.ndarray:
    """Stage rates 2(1 - cos(pi(2k-1)/(2(b+1)))), k = 1..b+1, of the exit time tau_b"""
    if b < 0:
        raise DomainError("b must be >= 0")
    k = np.arange(1, b + 2)
    return 2.0 * (1.0 - np.cos(np.pi * (2 * k - 1) / (2 * (b + 1))))


def hitting_time_moments(b: int) -> dict:
    means = 1.0 / hitting_time_mgf_rates(b)
    return {
        "mean": float(means.sum()),
        "variance": float(np.sum(means ** 2)),
        "mean_steps": float((b + 1) ** 2),
    }


def expected_local_times(b: int) -> np.ndarray:
    """E L_y(tau_b) by |y|: (b+1)/2 at 0, b+1-y otherwise"""
    y = np.arange(b + 1, dtype=float)
    expected = b + 1 - y
    expected[0] = (b + 1) / 2.0
    return expected


# Decay rate
def estimate_lambda_star(
    n: int,
    rates: KillRates,
    trials: int,
    horizon: float,
    seed: int,
    jump_rate: float = 1.0,
    start: int = 0,
    window: float = 0.5,
    n_jobs: Optional[int] = None,
) -> LambdaStarReport:
    """Slope of -log P(tau > t) over the last `window` fraction of [0, horizon]"""
    deaths = simulate_death_times(n, rates, trials, horizon, seed, start=start, jump_rate=jump_rate, n_jobs=n_jobs)
    window_start = horizon * (1.0 - window)
    survivors = int(np.sum(deaths > window_start))
    if survivors < MIN_SURVIVORS:
        raise InsufficientDataError(
            f"only {survivors} of {trials} walks alive at t={window_start:g}, need {MIN_SURVIVORS}"
        )
    final = float(np.mean(deaths > horizon - 1e-12))
    if final > 0.1:
        logger.warning(f"survival at the horizon is {final:.3f}; the tail window may be too early")
    grid = np.linspace(window_start, horizon, 41)
    counts = np.array([np.sum(deaths > t) for t in grid])
    grid, counts = grid[counts > 0], counts[counts > 0]
    slope = float(np.polyfit(grid, -np.log(counts / trials), 1)[0])
    logger.info(f"lambda* estimate {slope:.6g} from {survivors} survivors (n={n}, seed={seed})")
    return LambdaStarReport(
        n=n,
        trials=trials,
        seed=seed,
        horizon=horizon,
        window_start=window_start,
        survivors_at_window=survivors,
        lambda_star_estimate=slope,
        clock_factor=jump_rate / CHAIN_NEIGHBOR_RATE,
    )


def harper_lambda_star_exact(n: int, a: int = 1) -> float:
    """1 - lambda_1(M'), the chain-clock decay rate"""
    Mp = build_substochastic(build_harper(n, a))
    return float(1.0 - dense_hermitian_eigen(Mp.entries, with_vectors=False).eigenvalues[0])
