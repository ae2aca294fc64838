"""Dense Jacobi eigenvalues against the Strang iteration on coarse grids."""
import argparse

from cauchywell import SolverParams, WellPotential, make_grid, solve_sector
from cauchywell.operators import Sector, sector_inner
from cauchywell.oracle import assemble, lowest_eigenpairs, parity_eigenpairs


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--v0", type=float, default=8.3)
    p.add_argument("--a", type=float, default=6.0)
    p.add_argument("--dx", type=float, default=0.05)
    p.add_argument("--states", type=int, default=2)
    args = p.parse_args()

    params = SolverParams(h=2e-3, eig_tol=1e-12, max_iters=400_000)
    pot = WellPotential(args.v0)
    for sector in Sector:
        g = make_grid(sector.grid_kind, args.a, args.dx)
        op = assemble(sector, g, pot)
        if sector.is_1d:
            pairs = parity_eigenpairs(op, args.states, -1 if sector is Sector.ONED_ODD else 1)
        else:
            pairs = lowest_eigenpairs(op, args.states)
        strang = solve_sector(args.v0, sector, args.states, g, params)
        for n, ((value, state), r) in enumerate(zip(pairs, strang), 1):
            rel = abs(r.eigenvalue_at_a - value) / value
            ov = abs(sector_inner(state, r.eigenfunction))
            print(f"{sector.value:>9} n={n}  jacobi={value:.6f}  strang={r.eigenvalue_at_a:.6f}"
                  f"  rel={rel:.1e}  overlap={ov:.6f}")


if __name__ == "__main__":
    main()
