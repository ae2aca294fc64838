"""Ground-state eigenvalue against the cutoff a, with the 1/a tail law."""
import argparse

from cauchywell import SolverParams, make_grid, solve_multilevel
from cauchywell.renorm import TailRoute, tail_correction


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--v0", type=float, default=2.1)
    p.add_argument("--l", type=int, default=0, choices=(0, 1, 2))
    p.add_argument("--cutoffs", default="50,100,200")
    p.add_argument("--dx", type=float, default=0.002)
    p.add_argument("--tol", type=float, default=1e-10)
    args = p.parse_args()

    sector = {0: "oneD_odd", 1: "l1", 2: "l2"}[args.l]
    kind = "symmetric" if args.l == 0 else "radial"
    route = TailRoute.for_sector(sector)
    params = SolverParams(eig_tol=args.tol)
    cutoffs = [float(a) for a in args.cutoffs.split(",")]
    values = {}
    print(f"{'a':>6} {'E(a)':>10} {'E_inf':>10} {'gap':>9} {'law':>9}")
    for a in cutoffs:
        r = solve_multilevel(args.v0, sector, 1, make_grid(kind, a, args.dx), params)[0]
        values[a] = r.eigenvalue_at_a
        prev = [b for b in values if b < a]
        if prev:
            b = max(prev)
            gap = f"{values[a] - values[b]:9.6f}"
            law = f"{tail_correction(b, a, route):9.6f}"
        else:
            gap = law = f"{'':9}"
        print(f"{a:6g} {r.eigenvalue_at_a:10.6f} {r.eigenvalue_renormalized:10.6f} {gap} {law}")


if __name__ == "__main__":
    main()
