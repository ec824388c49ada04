"""Command-line front end.

Exit codes: 0 success, 1 certification failed, 2 invalid input (arguments,
specs, grid files), 3 numerical failure.
"""

import argparse
import csv
import json
import re
import sys
import time

import numpy as np

from . import gridfile
from ._roots import BracketError
from .convolution import convolution_grid
from .direct import DirectConfig, DirectError, direct_sequential, normal_scale_family
from .distributions import ChiSquared, MomentUnavailableError, StudentT
from .divergence import QuadratureError, SupportMismatchError
from .mixture import from_grid
from .specs import SpecError, parse_distribution, parse_family
from .verification import all_passed, certify_bins, marginal_divergence, qq_compare

EXIT_OK = 0
EXIT_CERT_FAILED = 1
EXIT_PARSE = 2
EXIT_NUMERIC = 3

_NUMERIC_ERRORS = (DirectError, BracketError, QuadratureError, SupportMismatchError,
                   MomentUnavailableError, FloatingPointError)


def _emit(rows, header, fmt, out):
    if fmt == "json":
        json.dump([dict(zip(header, r)) for r in rows], out, indent=2)
        out.write("\n")
    else:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _save_grid(gf, path, out):
    if path:
        gridfile.write(gf, path)
    else:
        out.write(gridfile.dumps(gf) + "\n")


def _config(args):
    return DirectConfig(delta=args.delta, epsilon=args.epsilon, start=args.start)


def cmd_student_t(args, out):
    if not args.nu > 0:
        raise SpecError("--nu must be positive")
    t0 = time.perf_counter()
    family = normal_scale_family(args.nu)
    grid = direct_sequential(family, ChiSquared(args.nu), _config(args))
    mix = from_grid(grid, family)
    achieved = marginal_divergence(StudentT(args.nu), mix)
    gf = gridfile.GridFile(grid, family.spec, args.delta, args.epsilon)
    _save_grid(gf, args.out, out)
    summary = [("k", grid.k), ("achieved_sym_kl", achieved), ("dropped_tail", grid.dropped_tail),
               ("seconds", round(time.perf_counter() - t0, 3))]
    _emit(summary, ("quantity", "value"), args.format, sys.stderr if not args.out else out)
    return EXIT_OK


def cmd_convolve(args, out):
    p_x = parse_distribution(args.x)
    p_y = parse_distribution(args.y)
    res = convolution_grid(p_x, p_y, _config(args), mixing=args.mixing)
    if res.family.spec is None:
        raise SpecError("the shifted summand has no text form")
    gf = gridfile.GridFile(res.grid, res.family.spec, args.delta, args.epsilon)
    _save_grid(gf, args.out, out)
    mixing_role = "x" if res.mixing is p_x else "y"
    summary = [("k", res.grid.k), ("mixing", mixing_role), ("family", res.family.spec)]
    _emit(summary, ("quantity", "value"), args.format, sys.stderr if not args.out else out)
    return EXIT_OK


def _parse_reals(tokens):
    vals = []
    for t in tokens:
        try:
            vals.append(float(t))
        except ValueError:
            raise SpecError(f"--at: {t!r} is not a number") from None
    return vals


def cmd_eval(args, out):
    gf = gridfile.read(args.grid)
    mix = gf.mixture()
    at = _parse_reals(args.at)
    fn = {"pdf": mix.pdf, "cdf": mix.cdf, "quantile": mix.quantile}[args.what]
    if args.what == "quantile" and any(not 0 < p < 1 for p in at):
        raise SpecError("quantile levels must lie strictly inside (0, 1)")
    rows = [(x, float(fn(x))) for x in at]
    _emit(rows, ("input", args.what), args.format, out)
    return EXIT_OK


def cmd_certify(args, out):
    gf = gridfile.read(args.grid)
    family = parse_family(args.family or gf.family)
    delta = gf.delta if args.delta is None else args.delta
    certs = certify_bins(gf.grid, family, delta, scan_points=args.scan_points)
    rows = [(c.index, c.lower, float(gf.grid.reference_points[c.index]), c.upper, c.d_max,
             "PASS" if c.passed else "FAIL") for c in certs]
    _emit(rows, ("bin", "lower", "reference", "upper", "d_max", "status"), args.format, out)
    return EXIT_OK if all_passed(certs) else EXIT_CERT_FAILED


def cmd_qq(args, out):
    gf = gridfile.read(args.grid)
    mix = gf.mixture()
    summands = [parse_distribution(s) for s in args.sum]
    rng = np.random.default_rng(args.seed)
    samples = np.zeros(args.n)
    for d in summands:
        samples += d.sample(rng, args.n)
    levels = np.asarray(args.levels, dtype=float)
    report = qq_compare(mix, samples, levels)
    if args.format == "json":
        _emit([tuple(map(float, r)) for r in report.rows()], ("level", "computed", "simulated", "se"),
              "json", out)
    else:
        report.write_csv(out)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="direct-mixture", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--delta", type=float, default=0.01, help="max symmetrised divergence")
        p.add_argument("--epsilon", type=float, default=1e-3, help="ignorable latent tail mass")
        p.add_argument("--start", type=float, default=None, help="first reference point")
        p.add_argument("--out", default=None, help="grid file to write (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("student-t", help="normal scale mixture approximating Student-t")
    p.add_argument("--nu", type=float, default=5.0)
    common(p)
    p.set_defaults(func=cmd_student_t)

    p = sub.add_parser("convolve", help="distribution of X + Y as a finite mixture")
    p.add_argument("--x", required=True, help="e.g. 'skewnormal(0,1,4)'")
    p.add_argument("--y", required=True, help="e.g. 'logistic(0,1)'")
    p.add_argument("--mixing", choices=("auto", "x", "y"), default="auto")
    common(p)
    p.set_defaults(func=cmd_convolve)

    p = sub.add_parser("eval", help="evaluate a grid's mixture")
    p.add_argument("grid")
    p.add_argument("--what", choices=("pdf", "cdf", "quantile"), required=True)
    p.add_argument("--at", nargs="+", required=True)
    # let values such as -1e-3 and -inf through as positionals of --at
    p._negative_number_matcher = re.compile(r"^-(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?$|^-inf(inity)?$", re.I)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("certify", help="per-bin divergence scan")
    p.add_argument("grid")
    p.add_argument("--family", default=None, help="override the grid file's family")
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--scan-points", type=int, default=256)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("qq", help="Q-Q table against simulated sums")
    p.add_argument("grid")
    p.add_argument("--sum", action="append", required=True,
                   help="summand distribution; repeat for each term")
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--levels", type=float, nargs="+",
                   default=[0.001, 0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99, 0.999])
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_qq)
    return parser


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (SpecError, gridfile.GridFileError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except _NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
