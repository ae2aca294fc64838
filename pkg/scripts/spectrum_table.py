"""Renormalised eigenvalues on the v0 x (l, n) lattice, written as CSV."""
import argparse
import sys

from cauchywell import make_grid
from cauchywell.cli import table_csv
from cauchywell.spectrum import spectrum_table


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--v0-list", default="2.1,3.5,4.8,5.2,6.7,8.1,8.3")
    p.add_argument("--a", type=float, default=50.0)
    p.add_argument("--dx", type=float, default=0.01)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--output", default="-")
    args = p.parse_args()

    v0_values = [float(v) for v in args.v0_list.split(",")]
    table = spectrum_table(v0_values, {0: 3, 1: 2, 2: 2},
                           lambda s: make_grid(s.grid_kind, args.a, args.dx),
                           jobs=args.jobs)
    text = table_csv(table)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)


if __name__ == "__main__":
    main()
