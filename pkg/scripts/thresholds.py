"""Existence thresholds of the (l, n) states at resolution 0.1."""
import argparse

from cauchywell import make_grid
from cauchywell.spectrum import scan_threshold, sector_for

TARGETS = [(0, 1, 1.5, 3.0), (0, 2, 4.5, 6.0), (0, 3, 7.5, 9.0),
           (1, 1, 3.0, 4.0), (1, 2, 6.0, 7.5), (2, 1, 4.0, 6.0), (2, 2, 7.5, 8.5)]


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--a", type=float, default=50.0)
    p.add_argument("--dx", type=float, default=0.01)
    p.add_argument("--strategy", default="bisect", choices=("walk", "bisect"))
    args = p.parse_args()

    print(f"{'l':>2} {'n':>2} {'bracket':>14} {'E(a) at upper':>14}")
    for l, n, lo, hi in TARGETS:
        sector = sector_for(l)
        grid = make_grid(sector.grid_kind, args.a, args.dx)
        rep = scan_threshold(sector, n, lo, hi, 0.1, grid, strategy=args.strategy)
        if rep.found:
            bracket = f"({rep.v0_lower:g}, {rep.v0_upper:g}]"
            print(f"{l:2d} {n:2d} {bracket:>14} {rep.upper_result.eigenvalue_at_a:14.5f}")
        else:
            print(f"{l:2d} {n:2d} {'not found':>14}")


if __name__ == "__main__":
    main()
