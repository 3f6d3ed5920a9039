import logging

import numpy as np
import pandas as pd

from harper.commands import add_output_arguments, write_results
from harper.models import AbsorbReport, RunConfig, WalkTrace
from harper.utils.reporting import emit_report, resolve_output
from harper.walks.absorbing import (
    CHAIN_NEIGHBOR_RATE,
    CLOCK_FACTOR,
    MIN_SURVIVORS,
    estimate_lambda_star,
    harper_kill_rates,
    harper_lambda_star_exact,
    simulate_killed_walk,
    survival_bound_check,
)

logger = logging.getLogger(__name__)

# the horizon leaves about 1/10^1.5 of the walks alive at its end
HORIZON_DECADES = 1.5


def register(subparsers):
    parser = subparsers.add_parser("absorb", help="killed walk survival and decay rate for the Harper rates")
    parser.add_argument("--n", type=int, required=True)
    parser.add_argument("--a", type=int, default=1)
    parser.add_argument("--b", type=int, default=16, help="exit half-width")
    parser.add_argument("--trials", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--start", type=int, default=0, help="starting site")
    parser.add_argument("--horizon", type=float, help="decay-rate horizon in chain time")
    parser.add_argument("--trace-out", dest="trace_out", help="CSV of one trajectory (t, state)")
    add_output_arguments(parser)
    parser.set_defaults(command="absorb")


def trace_table(trace: WalkTrace, n: int) -> pd.DataFrame:
    entry_times = np.concatenate([[0.0], np.cumsum(trace.holding_times)[:-1]])
    return pd.DataFrame({"t": entry_times, "state": np.mod(trace.states, n)})


def handle(config: RunConfig) -> str:
    n, a = config.n, config.a
    chain_rates = harper_kill_rates(n, a)
    walk_rates = chain_rates.rescaled(CLOCK_FACTOR)

    survival = survival_bound_check(n, walk_rates, config.b, config.trials, config.seed, start=config.start)

    exact = harper_lambda_star_exact(n, a)
    horizon = config.horizon or HORIZON_DECADES * np.log(10.0) / exact
    decay = estimate_lambda_star(
        n, chain_rates, config.trials, horizon, config.seed, jump_rate=CHAIN_NEIGHBOR_RATE, start=config.start
    )
    if decay.survivors_at_window < 2 * MIN_SURVIVORS:
        logger.warning(f"decay estimate rests on {decay.survivors_at_window} survivors")

    report = AbsorbReport(
        n=n,
        a=a,
        b=config.b,
        trials=config.trials,
        seed=config.seed,
        survival=survival.survival,
        g_b=survival.g_b,
        lambda_star_estimate=decay.lambda_star_estimate,
        lambda_star_exact=exact,
        clock_factor=decay.clock_factor,
    )
    target = write_results(config, report)

    if config.trace_out:
        trace = simulate_killed_walk(n, walk_rates, config.b, config.seed, start=config.start)
        emit_report(trace_table(trace, n), "csv", resolve_output(config.trace_out, "trace.csv"))

    return (
        f"absorb n={n} a={a} b={config.b} seed={config.seed}: survival {report.survival:.4f} "
        f"(G_b {report.g_b:.4f}), lambda* {report.lambda_star_estimate:.6f} vs {exact:.6f} -> {target}"
    )
