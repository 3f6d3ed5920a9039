import logging

import numpy as np

from harper.commands import add_output_arguments, write_results
from harper.models import RunConfig
from harper.spectral.core import (
    build_affine_transform,
    build_harper,
    build_mp3_diagonal,
    dense_hermitian_eigen,
    matrix_table,
    spectrum_table,
)
from harper.utils.reporting import emit_report, resolve_output

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("spectrum", help="full spectrum of a circulant-plus-diagonal matrix")
    parser.add_argument("--n", type=int, required=True, help="matrix size (the prime p for affine and mp3)")
    parser.add_argument("--a", type=int, default=1, help="Harper frequency")
    parser.add_argument("--family", choices=["harper", "affine", "mp3"], default="harper")
    parser.add_argument("--c", type=int, default=1, help="mp3 diagonal parameter")
    parser.add_argument("--matrix-out", dest="matrix_out", help="CSV of the dense entries (row, col, real[, imag])")
    add_output_arguments(parser)
    parser.set_defaults(command="spectrum")


def build_matrix(config: RunConfig):
    if config.family == "affine":
        return build_affine_transform(config.n)
    if config.family == "mp3":
        return build_mp3_diagonal(config.n, config.c)
    return build_harper(config.n, config.a)


def handle(config: RunConfig) -> str:
    M = build_matrix(config)
    dense = M.to_dense()
    spectrum = dense_hermitian_eigen(dense, with_vectors=False)
    target = write_results(config, spectrum_table(spectrum))
    if config.matrix_out:
        emit_report(matrix_table(dense), "csv", resolve_output(config.matrix_out, "matrix.csv"))
    trace = float(np.trace(dense).real)
    logger.info(f"{config.family} spectrum of size {M.n} written to {target}")
    return (
        f"spectrum {config.family} n={M.n}: lambda_1={spectrum.eigenvalues[0]:.12f} "
        f"lambda_n={spectrum.eigenvalues[-1]:.12f} sum={spectrum.eigenvalues.sum():.3e} "
        f"trace={trace:.3e} -> {target}"
    )
