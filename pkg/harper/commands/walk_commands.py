from harper.commands import add_output_arguments, write_results
from harper.models import RunConfig
from harper.walks.groups import affine_mixing_time, distance_curve


def register(subparsers):
    parser = subparsers.add_parser("walk", help="chi-square and total variation curves for group walks")
    groups = parser.add_subparsers(dest="group", metavar="{heisenberg,affine}")
    groups.required = True
    for name, help_text in (
        ("heisenberg", "walk on the Heisenberg group mod p"),
        ("affine", "walk on the affine group of Z/pZ"),
    ):
        sub = groups.add_parser(name, help=help_text)
        sub.add_argument("--p", type=int, required=True, help="prime modulus")
        sub.add_argument("--k-max", dest="k_max", type=int, default=30, help="last convolution power")
        add_output_arguments(sub)
        sub.set_defaults(command="walk")


def handle(config: RunConfig) -> str:
    curve = distance_curve(config.group, config.p, config.k_max)
    target = write_results(config, curve, stem=f"walk_{config.group}")
    last = curve.iloc[-1]
    summary = f"walk {config.group} p={config.p}: chi-square {last['chi_square']:.4e} at k={int(last['k'])}"
    if config.group == "affine":
        summary += f", chi-square <= 0.04 from k={affine_mixing_time(config.p)}"
    return f"{summary} -> {target}"
