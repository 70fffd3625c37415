"""
Command-line entry point: ``critlab <command> ...``.

Exit codes: 0 on success, 1 on invalid input, 2 on a numerical failure
(including experiments with failed rows and Gauss-Lucas violations).
"""

import argparse
import logging
import sys
from pathlib import Path

from .. import __version__
from ..atomfiles import format_atoms, read_atoms, write_atoms
from ..backends import RootFinderInterface, TransportInterface
from ..conf import configure
from ..ensembles import FAMILIES, EnsembleKind, EnsembleSpec, base_sequence, generate, validate_seed
from ..exceptions import CritLabError, InvalidSpec
from ..measures import EmpiricalMeasure, GridSpec, compare_potentials, w1_exact, w1_sliced
from ..polycore import Polynomial, RationalSum, RootSet
from ..rootfind import gauss_lucas_violations, match_rootsets
from .config import PROBES, load_spec
from .plots import plot_result
from .results import load_result_document, load_samples
from .runner import run, run_probe

logger = logging.getLogger(__name__)

BASE_NAMES = ("circle", "disk")
DISTANCE_METRICS = ("w1_exact", "w1_sliced", "auto", "bottleneck", "potential")


def _parse_value(text):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    return text


def _parse_params(pairs):
    params = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep:
            raise InvalidSpec(f"--param expects key=value, got {pair!r}")
        if "," in value:
            params[key] = [_parse_value(v) for v in value.split(",")]
        else:
            params[key] = _parse_value(value)
    return params


def _write_or_print(text, out):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- commands ------------------------------------------------------------------------


def cmd_run(args):
    spec = load_spec(args.config)
    spec = spec.with_overrides(output_dir=args.output_dir)
    if args.no_plot:
        spec = spec.with_overrides(plot=False)
    result = run(spec)
    print(f"{len(result.rows)} rows, {result.failed_rows} failed -> {args.output_dir or spec.output_dir}")
    return 2 if result.failed_rows else 0


def cmd_gen(args):
    params = _parse_params(args.param)
    seed = validate_seed(args.seed)
    if args.ensemble in BASE_NAMES:
        atoms = base_sequence(args.ensemble, args.n, float(params.get("scale", 1.0))).atoms
    else:
        if args.ensemble in FAMILIES:
            spec = EnsembleSpec(EnsembleKind.DETERMINISTIC, {"family": args.ensemble, **params})
        else:
            spec = EnsembleSpec(args.ensemble, params)
        drawn = generate(spec, args.n, seed)
        if isinstance(drawn, RationalSum):
            raise InvalidSpec("gen writes zeros; generalized_derivative produces a rational sum")
        atoms = drawn.atoms
    header = f"{args.ensemble} n={args.n} seed={seed}"
    _write_or_print(format_atoms(atoms, header=header), args.out)
    return 0


def cmd_roots(args):
    atoms, _ = read_atoms(args.atomfile)
    finder = RootFinderInterface()
    if args.coefficients:
        zeros = finder.roots(Polynomial(atoms)).roots
    else:
        zeros = RootSet(atoms)
    output, label = zeros, "zeros"
    if args.critical:
        report = finder.critical_points(zeros)
        converged = RootSet(report.roots.atoms[report.converged])
        outside = gauss_lucas_violations(zeros, converged)
        if outside.size:
            print(
                f"error: {outside.size} critical points lie outside the convex hull of the zeros",
                file=sys.stderr,
            )
            return 2
        output, label = report.roots, "critical points"
    header = f"{label} of {args.atomfile}"
    if args.out:
        write_atoms(args.out, output.atoms, header=header)
    else:
        sys.stdout.write(format_atoms(output.atoms, header=header))
    return 0


def cmd_dist(args):
    first = EmpiricalMeasure.from_atoms(*read_atoms(args.file_a))
    second = EmpiricalMeasure.from_atoms(*read_atoms(args.file_b))
    if args.metric == "w1_exact":
        value = w1_exact(first, second)
    elif args.metric == "w1_sliced":
        value = w1_sliced(first, second, args.projections, args.seed)
    elif args.metric == "auto":
        value = TransportInterface(seed=args.seed, n_projections=args.projections).distance(first, second)
    elif args.metric == "bottleneck":
        value = match_rootsets(RootSet(first.atoms), RootSet(second.atoms))
    else:
        value = compare_potentials(first, second, GridSpec.square(args.half_width, args.grid))
    print(repr(float(value)))
    return 0


def cmd_probe(args):
    spec = load_spec(args.config)
    results = run_probe(args.kind, spec)
    out = Path(args.out) if args.out else None
    for result in results:
        if out:
            out.mkdir(parents=True, exist_ok=True)
            (out / f"probe_{result.label}.csv").write_text(result.to_csv(), encoding="utf-8")
            (out / f"probe_{result.label}.json").write_text(result.to_json() + "\n", encoding="utf-8")
        else:
            sys.stdout.write(f"# {result.label}\n{result.to_csv()}")
    return 0


def cmd_plot(args):
    document = load_result_document(args.resultdir)
    written = plot_result(
        document["summary"],
        document["spec"]["metrics"],
        load_samples(args.resultdir),
        args.resultdir,
        document["spec"].get("name", ""),
    )
    for path in written:
        print(path)
    return 0


# -- parser --------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="critlab",
        description="Zeros and critical points of random polynomials: experiments, probes and distances.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for progress, -vv for solver detail"
    )
    parser.add_argument("--workers", type=int, help="worker processes (overrides CRITLAB_WORKERS)")
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="run an experiment config")
    run_parser.add_argument("config", help="experiment TOML file")
    run_parser.add_argument("--output-dir", help="override the config's output_dir")
    run_parser.add_argument("--no-plot", action="store_true", help="skip SVG output")
    run_parser.set_defaults(func=cmd_run)

    gen = commands.add_parser("gen", help="write the zeros of one ensemble draw as an atom file")
    gen.add_argument(
        "ensemble",
        help="ensemble kind, deterministic family or base sequence "
        f"({', '.join(k.value for k in EnsembleKind)}; {', '.join(FAMILIES)}; {', '.join(BASE_NAMES)})",
    )
    gen.add_argument("--n", type=int, required=True, help="ensemble index n")
    gen.add_argument("--seed", type=int, default=0, help="64-bit seed (default 0)")
    gen.add_argument("--param", action="append", metavar="KEY=VALUE", help="ensemble parameter; repeatable")
    gen.add_argument("--out", help="output file (default stdout)")
    gen.set_defaults(func=cmd_gen)

    roots = commands.add_parser("roots", help="zeros of a polynomial or critical points of a zero set")
    roots.add_argument("atomfile", help="atom file of zeros, or of coefficients with --coefficients")
    roots.add_argument(
        "--coefficients", action="store_true", help="file lists ascending coefficients; solve for zeros first"
    )
    roots.add_argument("--critical", action="store_true", help="output critical points (Gauss-Lucas checked)")
    roots.add_argument("--out", help="output file (default stdout)")
    roots.set_defaults(func=cmd_roots)

    dist = commands.add_parser("dist", help="distance between two atom files")
    dist.add_argument("file_a")
    dist.add_argument("file_b")
    dist.add_argument("--metric", choices=DISTANCE_METRICS, default="w1_exact")
    dist.add_argument("--seed", type=int, default=0, help="projection seed for w1_sliced")
    dist.add_argument("--projections", type=int, help="number of projections for w1_sliced")
    dist.add_argument("--half-width", type=float, default=2.0, help="potential grid half width")
    dist.add_argument("--grid", type=int, default=65, help="potential grid nodes per side")
    dist.set_defaults(func=cmd_dist)

    probe = commands.add_parser("probe", help="run one diagnostic probe from an experiment config")
    probe.add_argument("kind", choices=PROBES)
    probe.add_argument("config", help="experiment TOML file ([ensemble] and [probe] tables)")
    probe.add_argument("--out", help="directory for CSV and JSON output (default stdout)")
    probe.set_defaults(func=cmd_probe)

    plot = commands.add_parser("plot", help="redraw the SVG charts of a result directory")
    plot.add_argument("resultdir")
    plot.set_defaults(func=cmd_plot)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.workers is not None:
            configure(WORKERS=args.workers)
        return args.func(args)
    except CritLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
