"""Scan several measures over N for one family and write a long-format CSV."""
import argparse
import csv
import sys

from macroscopicity.library import valid_sizes
from macroscopicity.scaling import MeasureConfig, classify_scaling


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("family", help="family template, e.g. gen_ghz:eps=0.3")
    ap.add_argument("--measures", default="neff_f,rel_fisher,korsbakken,marquardt")
    ap.add_argument("--n-min", type=int, default=4)
    ap.add_argument("--n-max", type=int, default=12)
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--max-group-size", type=int, default=1)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()
    ns = valid_sizes(args.family, args.n_min, args.n_max)
    cfg = MeasureConfig(max_group_size=args.max_group_size, delta=args.delta)
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(("N", "neff", "measure_id", "family", "params"))
    for mid in args.measures.split(","):
        rep = classify_scaling(mid, args.family, ns, cfg)
        for n, v, m, fam, params in rep.csv_rows():
            w.writerow((n, f"{v:.12g}", m, fam, params))
        print(f"# {mid}: exponent={rep.exponent} verdict={rep.verdict}", file=sys.stderr)
    if fh is not sys.stdout:
        fh.close()


if __name__ == "__main__":
    main()
