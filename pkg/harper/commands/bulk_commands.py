from harper.bulk.density import DensityCurve, figure1_data, harper_empirical_measure, wasserstein2
from harper.commands import add_output_arguments, write_results
from harper.models import RunConfig


def register(subparsers):
    parser = subparsers.add_parser("bulk", help="eigenvalue histogram of M_n(a) against the limit density f2")
    parser.add_argument("--n", type=int, required=True)
    parser.add_argument("--a", type=int, default=1)
    parser.add_argument("--bins", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0, help="recorded only; the computation is deterministic")
    add_output_arguments(parser)
    parser.set_defaults(command="bulk")


def handle(config: RunConfig) -> str:
    emp = harper_empirical_measure(config.n, config.a)
    histogram = figure1_data(config.n, config.a, config.bins, emp=emp)
    distance = wasserstein2(emp, DensityCurve())
    if config.output_format == "json":
        results = {
            "n": config.n,
            "a": config.a,
            "bins": config.bins,
            "seed": config.seed,
            "wasserstein2": distance,
            "histogram": histogram,
        }
    else:
        results = histogram
    target = write_results(config, results)
    return f"bulk n={config.n} a={config.a} bins={config.bins} seed={config.seed}: W2 to f2 = {distance:.5f} -> {target}"
