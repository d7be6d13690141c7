"""Print the threshold constants gamma_d, c_d and log10(d + 1 - c_d)."""
import argparse

from randcomplex.thresholds import threshold_table


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", default="2,3,4,5,10,100,1000")
    args = ap.parse_args()
    print(f"{'d':>5} {'gamma_d':>10} {'c_d':>12} {'log10(d+1-c_d)':>16}")
    for d in (int(x) for x in args.d.split(",")):
        tb = threshold_table(d)
        print(f"{d:>5} {tb.gamma_d:>10.4f} {tb.c_d:>12.6f} {tb.log10_gap:>16.4f}")


if __name__ == "__main__":
    main()
