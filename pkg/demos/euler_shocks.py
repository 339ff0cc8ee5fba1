"""Euler shock problems (Sod, Liu-Lax, Kurganov-Tadmor, double Mach reflection).

Runs one case on a coarse structured mesh with MOOD and reports conservation,
admissibility and limiter activity.  Use --vtk to look at the density.
"""
import argparse

import numpy as np

from activeflux.harness import make_case, run_case, write_fields
from activeflux.harness.runner import mood_flag_fraction


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("case", nargs="?", default="sod2d",
                    choices=("sod2d", "liu_lax", "kurganov_tadmor", "dmr"))
    ap.add_argument("--n", type=int, default=32)
    ap.add_argument("--tfinal", type=float)
    ap.add_argument("--vtk")
    args = ap.parse_args()

    case = make_case(args.case)
    if args.tfinal is not None:
        case = case.with_(t_final=args.tfinal)
    res = run_case(case, n=args.n)
    space, st = res.problem.space, res.state
    q0, q1 = space.total(res.problem.initial), space.total(st)
    rho = st.averages[:, 0]
    print(f"{case.name}: {space.n_triangles} triangles, {res.log.steps} steps, {res.log.wall_time:.1f}s")
    print(f"density range [{rho.min():.4f}, {rho.max():.4f}]")
    print(f"admissible: {bool(np.all(case.model.admissible(st.point_values)))}")
    print(f"change of totals (boundary fluxes included): {np.array2string(q1 - q0, precision=3)}")
    print(f"flagged at final step: {mood_flag_fraction(res):.2%}")
    if args.vtk:
        write_fields(space, st, res.flags, args.vtk)


if __name__ == "__main__":
    main()
