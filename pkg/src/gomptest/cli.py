"""Command-line front end: fit, gof, simulate, lifetable, sample.

All data files are single-column CSV (optional header, '#' comments); all
randomness is seed-explicit and echoed in output headers. Exit codes:
0 success, 1 internal numeric failure, 2 usage or data error.
"""

import argparse
import csv
import io
import sys

import numpy as np

from .bootstrap import TestKind, bootstrap_many
from .distributions import GompertzParams, gompertz_sample, alt_sample
from .estimation import fit_mle
from .lifetable import (
    hazard_to_pmf,
    read_lifetable,
    sample_lifetimes,
    truncate_pmf,
    write_pmf,
)
from .simulation import (
    DEFAULT_A_GRID,
    DEFAULT_TESTS,
    config_from_file,
    parse_family,
    report_to_csv,
    run_study,
)

__all__ = ["main"]


def _read_column(path):
    """Single numeric CSV column; skips blanks, '#' comments, one header row."""
    values = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip() or row[0].lstrip().startswith("#"):
                continue
            try:
                values.append(float(row[0]))
            except ValueError:
                if not values:
                    continue  # header
                raise ValueError(f"non-numeric value {row[0]!r} in {path}")
    if not values:
        raise ValueError(f"no numeric data in {path}")
    return np.asarray(values, dtype=float)


def _open_out(path):
    return open(path, "w", newline="") if path else sys.stdout


def _write_column(path, values, seed=None):
    fh = _open_out(path)
    try:
        fh.write(f"# seed={seed}\n" if seed is not None else "")
        fh.write("value\n")
        for v in values:
            fh.write(f"{v:.15g}\n")
    finally:
        if fh is not sys.stdout:
            fh.close()


def _parse_tests(test_csv, a_csv):
    names = [t.strip().lower() for t in test_csv.split(",") if t.strip()]
    known = set(DEFAULT_TESTS)
    if not names or any(t not in known for t in names):
        raise ValueError(f"--test names must be drawn from {sorted(known)}")
    if len(set(names)) != len(names):
        raise ValueError("duplicate --test names")
    grid = [float(s) for s in a_csv.split(",") if s.strip()]
    kinds = []
    for name in names:
        if name == "stein":
            if not grid:
                raise ValueError("--a must be nonempty when the stein test is requested")
            kinds.extend(TestKind("stein", a) for a in grid)
        else:
            kinds.append(TestKind(name))
    return kinds


def cmd_fit(args):
    x = _read_column(args.input)
    fit = fit_mle(x)
    print(f"n={x.size}")
    print(f"eta_hat={fit.eta_hat:.15g}")
    print(f"b_hat={fit.b_hat:.15g}")
    print(f"b_pilot={fit.b_pilot:.15g}")
    print(f"converged={fit.converged}")
    print(f"fallback_used={fit.fallback_used}")
    print(f"iterations={fit.iterations}")
    return 0


def cmd_gof(args):
    if args.bootstrap < 1:
        raise ValueError("--bootstrap must be >= 1")
    if not 0.0 < args.alpha < 1.0:
        raise ValueError("--alpha must lie strictly inside (0, 1)")
    x = _read_column(args.input)
    kinds = _parse_tests(args.test, args.a)
    outcomes = bootstrap_many(x, kinds, B=args.bootstrap, alpha=args.alpha, seed=args.seed)
    first = outcomes[kinds[0]]
    buf = io.StringIO()
    buf.write(f"# seed={args.seed} n={x.size} B={args.bootstrap} alpha={args.alpha:g}\n")
    buf.write(
        f"# eta_hat={first.fit.eta_hat:.15g} b_hat={first.fit.b_hat:.15g} "
        f"fallback_used={first.fit.fallback_used} "
        f"notfound_boot={first.not_found_frequency_bootstrap:.15g}\n"
    )
    writer = csv.writer(buf)
    writer.writerow(["test", "a", "statistic", "p_value", "critical_value", "reject"])
    for kind in kinds:
        out = outcomes[kind]
        writer.writerow(
            [
                kind.name,
                f"{kind.a:g}" if kind.a is not None else "NA",
                f"{out.statistic:.15g}",
                f"{out.p_value:.15g}",
                f"{out.critical_value:.15g}",
                int(out.reject),
            ]
        )
    fh = _open_out(args.output)
    try:
        fh.write(buf.getvalue())
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_simulate(args):
    config = config_from_file(args.config)
    report = run_study(config, workers=args.workers, progress=True)
    text = report_to_csv(report)
    fh = _open_out(args.output)
    try:
        fh.write(f"# seed={config.seed}\n")
        fh.write(text)
    finally:
        if fh is not sys.stdout:
            fh.close()
    print(
        f"[study] done: {len(report.cells)} cells in {report.seconds:.1f}s",
        file=sys.stderr,
    )
    return 0


def cmd_lifetable(args):
    if args.n < 1:
        raise ValueError("--n must be >= 1")
    table = read_lifetable(args.input)
    pmf = hazard_to_pmf(table)
    if args.truncate is not None:
        pmf = truncate_pmf(pmf, args.truncate[0], args.truncate[1])
    values = sample_lifetimes(pmf, args.n, args.seed, jitter=args.jitter)
    _write_column(args.output, values, seed=args.seed)
    if args.pmf_output:
        write_pmf(pmf, args.pmf_output)
    return 0


def cmd_sample(args):
    tokens, n, seed = [], args.n, args.seed
    for tok in args.spec:
        key, sep, val = tok.partition("=")
        if sep and key == "n" and n is None:
            n = int(val)
        elif sep and key == "seed" and seed is None:
            seed = int(val)
        else:
            tokens.append(tok)
    if n is None:
        raise ValueError("sample size is required (n=... or --n)")
    if n < 1:
        raise ValueError("sample size must be >= 1")
    seed = 0 if seed is None else seed
    dist = parse_family(" ".join(tokens))
    if isinstance(dist, GompertzParams):
        values = gompertz_sample(dist, n, seed)
    else:
        values = alt_sample(dist, n, seed)
    _write_column(args.output, values, seed=seed)
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="gomptest",
        description="Goodness-of-fit tests for the Gompertz distribution.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="maximum likelihood fit of a sample")
    p_fit.add_argument("--input", required=True, help="single-column CSV of positive values")
    p_fit.set_defaults(func=cmd_fit)

    p_gof = sub.add_parser("gof", help="bootstrap goodness-of-fit tests")
    p_gof.add_argument("--input", required=True, help="single-column CSV of positive values")
    p_gof.add_argument("--output", default=None, help="write results CSV here (default stdout)")
    p_gof.add_argument("--test", default=",".join(DEFAULT_TESTS),
                       help="comma list from {stein,ks,ad,cm,wa}")
    p_gof.add_argument("--a", default=",".join(f"{a:g}" for a in DEFAULT_A_GRID),
                       help="comma list of weight parameters for the stein test")
    p_gof.add_argument("--bootstrap", type=int, default=500, metavar="B")
    p_gof.add_argument("--alpha", type=float, default=0.05)
    p_gof.add_argument("--seed", type=int, default=0)
    p_gof.set_defaults(func=cmd_gof)

    p_sim = sub.add_parser("simulate", help="run a Monte-Carlo study from a config file")
    p_sim.add_argument("--config", required=True, help="flat key=value study config")
    p_sim.add_argument("--output", default=None, help="write report CSV here (default stdout)")
    p_sim.add_argument("--workers", type=int, default=1)
    p_sim.set_defaults(func=cmd_simulate)

    p_lt = sub.add_parser("lifetable", help="sample lifetimes from a hazard table")
    p_lt.add_argument("--input", required=True, help="two-column CSV (age, hazard)")
    p_lt.add_argument("--output", default=None, help="write sample CSV here (default stdout)")
    p_lt.add_argument("--n", type=int, required=True)
    p_lt.add_argument("--seed", type=int, default=0)
    p_lt.add_argument("--truncate", type=int, nargs=2, metavar=("L", "R"), default=None)
    p_lt.add_argument("--jitter", action="store_true",
                      help="add U(0,1) within-year noise to the integer ages")
    p_lt.add_argument("--pmf-output", default=None, help="also write the pmf CSV here")
    p_lt.set_defaults(func=cmd_lifetable)

    p_smp = sub.add_parser("sample", help="draw from a distribution family")
    p_smp.add_argument("spec", nargs="+",
                       help="family spec, e.g. gompertz eta=1 b=1 n=100 seed=7")
    p_smp.add_argument("--n", type=int, default=None)
    p_smp.add_argument("--seed", type=int, default=None)
    p_smp.add_argument("--output", default=None, help="write sample CSV here (default stdout)")
    p_smp.set_defaults(func=cmd_sample)
    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ArithmeticError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
