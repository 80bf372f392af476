"""Grid scans: scan-horodecki, scan-4x4, noise-scan and thresholds."""

from app.commands.common import add_grid_arguments, grid_from_args, write_output
from app.services.criteria import threshold_table
from app.services.scans import example_4x4_scan, horodecki_scan, noise_scan


def register(subparsers) -> None:
    horodecki = subparsers.add_parser("scan-horodecki", help="verdicts over a p grid of the Horodecki family")
    horodecki.add_argument("--d", type=int, default=2)
    horodecki.add_argument("--l", type=int, default=1)
    horodecki.add_argument("--eps", type=float, default=0.0, help="white-noise level applied to every row")
    horodecki.add_argument("--gnuplot", action="store_true", help="whitespace-separated numeric layout")
    add_grid_arguments(horodecki, "p", 0.01, 0.49, 0.01)
    horodecki.set_defaults(handler=run_horodecki)

    example = subparsers.add_parser("scan-4x4", help="verdicts over a q1 grid of the 4x4 example")
    add_grid_arguments(example, "q1", 0.0, 1.0, 0.05)
    example.set_defaults(handler=run_4x4)

    noise = subparsers.add_parser("noise-scan", help="noise thresholds over an eps grid")
    noise.add_argument("--l", type=int, default=2)
    noise.add_argument("--d", type=int, default=2)
    noise.add_argument("--delta", type=float, default=1e-3, help="p offset for the cross-check rows")
    add_grid_arguments(noise, "eps", 0.0, 0.2, 0.01)
    noise.set_defaults(handler=run_noise)

    table = subparsers.add_parser("thresholds", help="p1, p2, PPT bound and eps* per l")
    table.add_argument("--l-max", type=int, default=10)
    table.add_argument("--d", type=int, default=2)
    table.set_defaults(handler=run_thresholds)


def run_horodecki(args) -> None:
    rows = horodecki_scan(args.d, args.l, grid_from_args(args, "p"), eps=args.eps)
    write_output(args, rows, default_format="csv")


def run_4x4(args) -> None:
    write_output(args, example_4x4_scan(grid_from_args(args, "q1")), default_format="csv")


def run_noise(args) -> None:
    rows = noise_scan(args.l, grid_from_args(args, "eps"), d=args.d, delta=args.delta)
    write_output(args, rows, default_format="csv")


def run_thresholds(args) -> None:
    write_output(args, threshold_table(args.l_max, args.d), default_format="csv")
