#!/usr/bin/env python3
"""Growth of the two-term error over long times at fixed eps.

Integrates one Gaussian case to a geometric ladder of final times and fits
the two-term error against t.  On the window 1 <= t <= delta0 / eps^2 the
error should grow roughly like t^2: quadratic-in-time growth of the
two-term defect is what caps the usable time horizon of the expansion.
The default amplitude keeps the largest requested time inside that window
(delta0 / eps^2 = 16 with the defaults).

Writes records.csv and summary.txt; prints the fitted time exponent.
"""

import argparse
import sys
from pathlib import Path

from nrkg.data import DataSpec
from nrkg.reporting import write_records_csv, write_summary
from nrkg.spectral import make_grid
from nrkg.sweep import SolverOptions, fit_order, run_case


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--eps", type=float, default=2.0**-3)
    p.add_argument("--times", type=float, nargs="+", default=[2.0, 4.0, 8.0, 16.0])
    p.add_argument("--a0", type=float, default=0.5)
    p.add_argument("--delta0", type=float, default=0.25)
    p.add_argument("--points", type=int, default=1024)
    p.add_argument(
        "--half-width",
        type=float,
        default=64.0,
        help="torus half width; wide boxes keep the dispersing envelope inside",
    )
    p.add_argument("--dt-profile", type=float, default=1e-2)
    p.add_argument("--out", type=Path, default=Path("growth-window"))
    args = p.parse_args(argv)

    grid = make_grid(1, args.points, args.half_width)
    spec = DataSpec(a0=args.a0, delta0=args.delta0)
    options = SolverOptions(dt_v=args.dt_profile, dt_w=args.dt_profile)

    print(
        f"eps={args.eps:g}: validity window 1 <= t <= {args.delta0 / args.eps**2:g}",
        file=sys.stderr,
    )
    records = run_case(spec, args.eps, args.times, grid, options)
    fit = fit_order(records, "t", "second_order_error_l2")

    args.out.mkdir(parents=True, exist_ok=True)
    write_records_csv(records, args.out / "records.csv")
    write_summary(records, [fit], args.out / "summary.txt")

    print((args.out / "summary.txt").read_text())
    print(f"time exponent: {fit.slope:.3f}  expected ~2")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
