"""Command line entry point: solve, reference, compare, flow, render."""

from __future__ import annotations

import argparse
import logging
import sys
import time

import numpy as np

from . import harness
from .geometry import CurveSpec, NotStarShapedError, default_n, discretize
from .ntdflow import SingularSystemError, flow_scan, write_flow_csv
from .reconstruct import eval_mode, intensity_image, interior_grid, write_pgm
from .reference import ReferenceConfig, solve_reference

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_COUNT_MISMATCH = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("ntdeig")


class _Parser(argparse.ArgumentParser):
    # argparse's default status 2 would collide with the count-mismatch code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _range(text: str):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}") from None
    return lo, hi


def _domain(text: str) -> CurveSpec:
    try:
        return CurveSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ntdeig", description="High-frequency Dirichlet eigenmodes of star-shaped planar domains.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="NtD window sweep")
    s.add_argument("--domain", type=_domain, required=True)
    s.add_argument("--range", type=_range, required=True)
    s.add_argument("--eps", type=float, default=0.1)
    s.add_argument("--khat", choices=["l", "r", "linear", "riccati"], default="r")
    s.add_argument("--fhat", choices=["t", "l", "q", "trivial", "linear", "quadratic"], default="q")
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", required=True)

    r = sub.add_parser("reference", help="minimum singular value root search")
    r.add_argument("--domain", type=_domain, required=True)
    r.add_argument("--range", type=_range, required=True)
    r.add_argument("--tol", type=float, default=1e-12)
    r.add_argument("--maxslope", type=float, default=1.5)
    r.add_argument("--n", type=int, default=None)
    r.add_argument("--out", required=True)

    c = sub.add_parser("compare", help="score NtD output against reference output")
    c.add_argument("--ntd", required=True)
    c.add_argument("--ref", required=True)
    c.add_argument("--out", required=True)
    c.add_argument("--csv", default=None)
    c.add_argument("--cluster-tol", type=float, default=1e-6)

    f = sub.add_parser("flow", help="tabulate NtD eigenvalues against k")
    f.add_argument("--domain", type=_domain, required=True)
    f.add_argument("--kmin", type=float, required=True)
    f.add_argument("--kmax", type=float, required=True)
    f.add_argument("--samples", type=int, default=50)
    f.add_argument("--n", type=int, default=None)
    f.add_argument("--beta-max", type=float, default=None, help="only keep |beta| below this")
    f.add_argument("--out", required=True)

    m = sub.add_parser("render", help="write a PGM intensity image of one mode")
    m.add_argument("--modes", required=True)
    m.add_argument("--index", type=int, required=True)
    m.add_argument("--dx", type=float, default=0.002)
    m.add_argument("--out", required=True)
    return p


def cmd_solve(a) -> int:
    lo, hi = a.range
    cfg = harness.SweepConfig(a.domain, lo, hi, a.eps, n=a.n, khat=a.khat, fhat=a.fhat, workers=a.workers)
    modes, elapsed = harness.timed(harness.solvespectrum, cfg)
    harness.write_with_timing(harness.modes_to_dict(cfg, modes), a.out, elapsed)
    log.info("%d modes in %.2fs", len(modes), elapsed)
    return EXIT_OK


def cmd_reference(a) -> int:
    lo, hi = a.range
    N = a.n or default_n(a.domain, hi)
    nodes = discretize(a.domain, N)
    cfg = ReferenceConfig(tol=a.tol, maxslope=a.maxslope)
    (modes, probes), elapsed = harness.timed(solve_reference, lo, hi, nodes, cfg)
    harness.write_with_timing(harness.reference_to_dict(a.domain, N, lo, hi, cfg, modes, probes), a.out, elapsed)
    bad = [m.kj for m in modes if m.suspect]
    if bad:
        log.warning("suspect frequencies: %s", bad)
    log.info("%d eigenfrequencies, %d probes, %.2fs", sum(m.multiplicity for m in modes), probes, elapsed)
    return EXIT_OK


def cmd_compare(a) -> int:
    report = harness.match_and_score(harness.load_json(a.ntd), harness.load_json(a.ref), a.cluster_tol)
    harness.dump_json(report.to_dict(), a.out)
    if a.csv:
        harness.report_csv(report, a.csv)
    agg = report.aggregates
    print(f"{report.status}: ntd={agg['count_ntd']} ref={agg['count_ref']} "
          f"max|dk|={agg['max_abs_k_err']} max f err={agg['max_f_err']}")
    if report.status != "PASS":
        print(f"unmatched ntd: {report.unmatched_ntd}\nunmatched ref: {report.unmatched_ref}")
        return EXIT_COUNT_MISMATCH
    return EXIT_OK


def cmd_flow(a) -> int:
    if not a.kmax > a.kmin > 0 or a.samples < 2:
        raise ValueError("need 0 < kmin < kmax and at least two samples")
    nodes = discretize(a.domain, a.n or default_n(a.domain, a.kmax))
    window = (-a.beta_max, a.beta_max) if a.beta_max else (-np.inf, np.inf)
    ks, rows = flow_scan(nodes, a.kmin, a.kmax, a.samples, window)
    write_flow_csv(a.out, ks, rows)
    return EXIT_OK


def cmd_render(a) -> int:
    data = harness.load_json(a.modes)
    if not 0 <= a.index < len(data["modes"]):
        raise IndexError(f"mode index {a.index} out of range (0..{len(data['modes']) - 1})")
    mode = data["modes"][a.index]
    nodes = discretize(CurveSpec.parse(data["domain"]), int(mode["N"]))
    grid = interior_grid(nodes, a.dx)
    values, _ = eval_mode(mode["khat"], np.asarray(mode["fhat"]), grid.points, nodes)
    write_pgm(a.out, intensity_image(grid, values))
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "reference": cmd_reference, "compare": cmd_compare,
            "flow": cmd_flow, "render": cmd_render}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        code = COMMANDS[args.command](args)
    except (SingularSystemError, NotStarShapedError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, IndexError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    log.info("%s finished in %.2fs", args.command, time.perf_counter() - t0)
    return code


if __name__ == "__main__":
    sys.exit(main())
