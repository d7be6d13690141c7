"""Limiting densities against c, with an optional Monte Carlo overlay.

Writes a CSV; with --plot also a PNG (needs matplotlib).
"""
import argparse
import csv
import math

import numpy as np

from randcomplex.collapse import collapse_to_core
from randcomplex.sampling import SampleConfig, sample
from randcomplex.thresholds import regime_densities


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--c-min", type=float, default=1.5)
    ap.add_argument("--c-max", type=float, default=4.0)
    ap.add_argument("--points", type=int, default=26)
    ap.add_argument("--n", type=int, default=0, help="vertices for the overlay (0 skips it)")
    ap.add_argument("--trials", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="curves.csv")
    ap.add_argument("--plot", default=None)
    args = ap.parse_args()

    rows = []
    for c in np.linspace(args.c_min, args.c_max, args.points):
        r = regime_densities(float(c), args.d)
        emp1 = emp2 = float("nan")
        if args.n:
            ridges = math.comb(args.n, args.d)
            res = [collapse_to_core(sample(SampleConfig(n=args.n, d=args.d, c=float(c), seed=args.seed, trial=t)))
                   for t in range(args.trials)]
            emp1 = float(np.mean([x.core_dminus1_count / ridges for x in res]))
            emp2 = float(np.mean([x.core.f_d / ridges for x in res]))
        rows.append([float(c), r.t, r.core_dminus1_density, r.core_d_density, r.betti_density,
                     r.shadow_density, r.r_shadow_density, emp1, emp2])
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["c", "t", "core_f1", "core_f2", "betti", "c_shadow", "r_shadow", "emp_core_f1", "emp_core_f2"])
        w.writerows(rows)
    print(f"wrote {args.out}")
    if args.plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        a = np.array(rows)
        fig, ax = plt.subplots(figsize=(6, 4))
        for j, name in ((2, "core f_{d-1}"), (3, "core f_d"), (4, "beta_d"), (5, "C-shadow"), (6, "R-shadow")):
            ax.plot(a[:, 0], a[:, j], label=name)
        if args.n:
            ax.plot(a[:, 0], a[:, 7], "o", ms=3, label=f"n={args.n} f_{{d-1}}")
            ax.plot(a[:, 0], a[:, 8], "s", ms=3, label=f"n={args.n} f_d")
        ax.set_xlabel("c")
        ax.legend(fontsize=7)
        fig.tight_layout()
        fig.savefig(args.plot, dpi=120)
        print(f"wrote {args.plot}")


if __name__ == "__main__":
    main()
