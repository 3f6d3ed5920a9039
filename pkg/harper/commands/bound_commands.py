import logging

import numpy as np

from harper.commands import add_output_arguments, write_results
from harper.commands.spectrum_commands import build_matrix
from harper.models import RunConfig
from harper.spectral.bounds import (
    improved_bound,
    optimize_bound,
    smallest_eigenvalue_bound,
    theorem1_bound,
)

logger = logging.getLogger(__name__)

BOUNDS = {
    "theorem1": theorem1_bound,
    "improved": improved_bound,
    "smallest": smallest_eigenvalue_bound,
}


def register(subparsers):
    parser = subparsers.add_parser("bound", help="uncertainty-principle eigenvalue bound")
    parser.add_argument("--n", type=int, required=True)
    parser.add_argument("--a", type=int, default=1)
    parser.add_argument("--family", choices=["harper", "affine", "mp3"], default="harper")
    parser.add_argument("--c", type=int, default=1)
    parser.add_argument("--variant", choices=sorted(BOUNDS), default="theorem1")
    parser.add_argument("--k", type=int, help="diagonal gap index (omit to optimize over the grid)")
    parser.add_argument("--k-prime", dest="k_prime", type=int, help="circulant gap index (defaults to --k)")
    add_output_arguments(parser)
    parser.set_defaults(command="bound")


def handle(config: RunConfig) -> str:
    M = build_matrix(config)
    C, D = M.circulant, M.diagonal
    k = config.k
    if k is None and config.variant == "smallest":
        k = max(1, int(np.floor(np.sqrt(M.n) / 2)))
    if k is None:
        report = optimize_bound(C, D, config.variant)
    else:
        report = BOUNDS[config.variant](C, D, k, config.k_prime or k)
    target = write_results(config, report)
    return (
        f"bound {report.variant} n={report.n} k={report.k} k'={report.k_prime}: "
        f"{report.bound:.12f} (weyl {report.weyl_term:.12f}, correction {report.correction:.3e}) -> {target}"
    )
