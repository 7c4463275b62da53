"""Command-line interface: ``vinedist <verb> [options]``.

Exit status is 0 on success, 1 on usage, parse, domain, structure or
contract errors and 2 on numerical failures.  Every error is reported as a
single line ``error[<kind>]: <message>`` on standard error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import distance as dist
from . import experiments
from .errors import NumericError, VineError
from .io import dumps, read_vine, vine_to_dict
from .vine import count_same_diagonal, nearest_gaussian, sample_vine, vine_log_density

EXIT_OK, EXIT_ERROR, EXIT_NUMERIC = 0, 1, 2
METHODS = ("akl", "dkl", "sdkl", "mckl", "cubature", "gauss")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _real_row(row) -> str:
    return " ".join(format(float(x), ".17g") for x in row)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="vinedist", description="Distances between vine copulas.")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", help="parse and validate a vine file")
    s.add_argument("file")

    s = sub.add_parser("density", help="evaluate the copula density at points")
    s.add_argument("file")
    s.add_argument("--points", default="-", help="whitespace separated rows of d reals ('-' = stdin)")
    s.add_argument("--log", action="store_true", help="print log-densities")

    s = sub.add_parser("sample", help="draw a seeded sample")
    s.add_argument("file")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("kl", help="distance between two vines")
    s.add_argument("f")
    s.add_argument("g")
    s.add_argument("--method", choices=METHODS, default="dkl")
    s.add_argument("--n", type=int, default=10, help="grid points per axis or diagonal")
    s.add_argument("--beta", type=float, default=0.95)
    s.add_argument("--a", type=float, default=4.0, help="tail transform strength")
    s.add_argument("--nmc", type=int, default=1_000_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=float, default=None)
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--override", action="store_true", help="ignore soft dimension limits")
    s.add_argument("--timing", action="store_true", help="include wall-clock time in the report")

    s = sub.add_parser("nearest-gaussian", help="print the nearest Gaussian vine")
    s.add_argument("file")

    s = sub.add_parser("experiment", help="reproduce a study table")
    s.add_argument("--table", required=True, choices=[t.value for t in experiments.TableId])
    s.add_argument("--scale", choices=experiments.SCALES, default="desk")
    s.add_argument("--format", choices=("json", "text"), default="json")

    s = sub.add_parser("count-vines", help="number of vines sharing one structure diagonal")
    s.add_argument("--d", type=int, required=True)
    return p


def _read_points(source: str, d: int) -> np.ndarray:
    text = sys.stdin.read() if source == "-" else open(source).read()
    rows = [line.split() for line in text.splitlines() if line.strip()]
    try:
        pts = np.array([[float(x) for x in row] for row in rows], dtype=float)
    except ValueError as exc:
        raise _UsageError(f"bad point value ({exc})") from None
    if pts.ndim != 2 or pts.shape[1] != d:
        raise _UsageError(f"points must be rows of {d} reals")
    return pts


def _kl(args, out) -> None:
    rf, rg = read_vine(args.f), read_vine(args.g)
    spec = dist.GridSpec(n=args.n, beta=args.beta, a=args.a)
    tol = {} if args.tol is None else {"tol": args.tol}
    m = args.method
    if m in ("akl", "dkl", "sdkl"):
        kw = dict(tol, workers=args.workers)
        if m != "sdkl":
            kw["override"] = args.override
        rep = getattr(dist, m)(rf, rg, spec, **kw)
    elif m == "mckl":
        rep = dist.mckl(rf, rg, n_mc=args.nmc, seed=args.seed)
    elif m == "cubature":
        rep = dist.cubature_kl(rf, rg, beta=args.beta, **tol)
    else:
        value = dist.gaussian_kl_analytic(dist.gaussian_vine_corr(rf), dist.gaussian_vine_corr(rg))
        rep = dist.DistanceReport("gauss", value, {}, 1)
    doc = rep.as_dict()
    if not args.timing:
        doc.pop("wallclock", None)
    out.write(dumps(doc))


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = _build_parser().parse_args(argv)
        if args.verb == "validate":
            r = read_vine(args.file)
            out.write(f"ok: d={r.d}, diagonal {' '.join(map(str, r.diagonal))}\n")
        elif args.verb == "density":
            r = read_vine(args.file)
            ld = np.atleast_1d(vine_log_density(r, _read_points(args.points, r.d)))
            for v in (ld if args.log else np.exp(ld)):
                out.write(format(float(v), ".17g") + "\n")
        elif args.verb == "sample":
            r = read_vine(args.file)
            for row in sample_vine(r, args.n, args.seed):
                out.write(_real_row(row) + "\n")
        elif args.verb == "kl":
            _kl(args, out)
        elif args.verb == "nearest-gaussian":
            out.write(dumps(vine_to_dict(nearest_gaussian(read_vine(args.file)))))
        elif args.verb == "experiment":
            res = experiments.reproduce_table(args.table, args.scale)
            out.write(res.render() if args.format == "text" else res.to_json())
        elif args.verb == "count-vines":
            out.write(f"{count_same_diagonal(args.d)}\n")
    except _UsageError as exc:
        err.write(f"error[usage]: {exc}\n")
        return EXIT_ERROR
    except NumericError as exc:
        detail = f" ({exc.detail})" if exc.detail else ""
        err.write(f"error[{exc.kind}]: {exc}{detail}\n")
        return EXIT_NUMERIC
    except VineError as exc:
        err.write(f"error[{exc.kind}]: {exc}\n")
        return EXIT_ERROR
    except OSError as exc:
        err.write(f"error[io]: {exc}\n")
        return EXIT_ERROR
    return EXIT_OK


def main() -> None:
    sys.exit(run())
