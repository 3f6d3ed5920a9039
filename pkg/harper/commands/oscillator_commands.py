from harper.commands import add_output_arguments, write_results
from harper.models import RunConfig
from harper.spectral.oscillator import convergence_table


def register(subparsers):
    parser = subparsers.add_parser("oscillator", help="scaled edge eigenvalues against (2k-1) pi / 2")
    parser.add_argument("--n", type=int, required=True)
    parser.add_argument("--sizes", type=int, nargs="+", help="extra sizes for the convergence table")
    parser.add_argument("--k", type=int, default=3, help="number of levels per spectrum end")
    add_output_arguments(parser)
    parser.set_defaults(command="oscillator")


def handle(config: RunConfig) -> str:
    sizes = sorted(set([config.n] + list(config.sizes or [])))
    table = convergence_table(sizes, range(1, (config.k or 3) + 1))
    target = write_results(config, table)
    largest = table[table["n"] == sizes[-1]]
    return f"oscillator n={sizes}: max abs error at n={sizes[-1]} is {largest['abs_error'].max():.4f} -> {target}"
