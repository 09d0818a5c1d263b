"""Log-log slopes of sup|R| and sup|R1| against the momentum level, per alpha.

Usage: python scripts/remainder_slopes.py [--alphas 3 4 5] [--grid 32]
"""

import argparse

from qposc.checks import sup_on_grid
from qposc.forcing import default_forcing
from qposc.special_functions import build_table, derive_params
from qposc.successor import loglog_fit
from qposc.transforms import compute_thresholds, make_model, remainder_R, remainder_R1


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alphas", type=float, nargs="+", default=[3.0, 4.0, 5.0])
    ap.add_argument("--grid", type=int, default=32)
    args = ap.parse_args()
    levels = [1e3, 1e4, 1e5, 1e6, 1e7]
    print(f"{'alpha':>6} {'target':>8} {'slope R':>9} {'slope R1':>9} {'b_alpha':>8}")
    for a in args.alphas:
        P = derive_params(a)
        tb = build_table(P)
        torus = default_forcing()
        m = make_model(P, tb, torus, thresholds=compute_thresholds(P, tb, torus))
        fR = loglog_fit(levels, sup_on_grid(remainder_R, m, levels, args.grid))
        fR1 = loglog_fit(levels, sup_on_grid(remainder_R1, m, levels, args.grid))
        print(f"{a:6.2f} {P.rem_exp:8.4f} {fR.slope:9.4f} {fR1.slope:9.4f} {P.b_alpha:8.4f}")


if __name__ == "__main__":
    main()
