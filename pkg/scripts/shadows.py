"""Empirical C-shadow and R-shadow densities next to (1 - t)^{d+1}."""
import argparse
import math

import numpy as np

from randcomplex.collapse import c_shadow
from randcomplex.homology import r_shadow
from randcomplex.linalg import PRIME
from randcomplex.sampling import SampleConfig, sample
from randcomplex.thresholds import regime_densities


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=120)
    ap.add_argument("--c", default="2.4,2.6,2.8,3.0")
    ap.add_argument("--trials", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    top = math.comb(args.n, 3)
    print(f"{'c':>5} {'SH_C':>8} {'SH_R':>8} {'(1-t)^3':>8} {'theory SH_R':>12}")
    for c in (float(x) for x in args.c.split(",")):
        sc, sr = [], []
        for t in range(args.trials):
            Y = sample(SampleConfig(n=args.n, d=2, c=c, seed=args.seed, trial=t))
            sc.append(c_shadow(Y).size / top)
            sr.append(r_shadow(Y, PRIME, seed=t).size / top)
        r = regime_densities(c, 2)
        print(f"{c:>5.2f} {np.mean(sc):>8.4f} {np.mean(sr):>8.4f} {r.shadow_density:>8.4f} {r.r_shadow_density:>12.4f}")


if __name__ == "__main__":
    main()
