"""P_out / P_in of the 3D ground state as the cutoff grows."""
import argparse

from cauchywell import SolverParams, make_grid, solve_multilevel
from cauchywell.spectrum import probability_ratio


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--v0", type=float, default=2.1)
    p.add_argument("--cutoffs", default="50,100,200,500")
    p.add_argument("--dx", type=float, default=0.005)
    args = p.parse_args()

    params = SolverParams(eig_tol=1e-10)
    for a in (float(x) for x in args.cutoffs.split(",")):
        r = solve_multilevel(args.v0, "oneD_odd", 1, make_grid("symmetric", a, args.dx), params)[0]
        print(f"a={a:6g}  E(a)={r.eigenvalue_at_a:.6f}  ratio={probability_ratio(r):.4f}")


if __name__ == "__main__":
    main()
