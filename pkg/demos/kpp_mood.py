"""KPP rotating wave with MOOD: watch which cells fall back to first order.

The flux is non-convex, so the unlimited scheme produces wrong composite
waves.  The limiter keeps every value within [pi/4, 7pi/2]; the printout shows
the range and how many cells were flagged in each reported step.
"""
import argparse

import numpy as np

from activeflux.harness import make_case, run_case, write_fields


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=40)
    ap.add_argument("--order", type=int, default=2, choices=(2, 3))
    ap.add_argument("--every", type=int, default=25)
    ap.add_argument("--vtk", help="write point/cell VTK files with this stem")
    args = ap.parse_args()

    case = make_case("kpp").with_(order=args.order)
    step = [0]

    def report(state, info):
        step[0] += 1
        if step[0] % args.every == 0 and info.flags is not None:
            u = state.point_values[:, 0]
            print(f"t={state.time:.3f}  range [{u.min():.4f}, {u.max():.4f}]  "
                  f"flagged cells {np.count_nonzero(info.flags.triangles)}")

    res = run_case(case, n=args.n, callback=report)
    u = np.concatenate([res.state.point_values[:, 0], res.state.averages[:, 0]])
    print(f"final range [{u.min():.6f}, {u.max():.6f}] vs [{np.pi / 4:.6f}, {3.5 * np.pi:.6f}]")
    if args.vtk:
        write_fields(res.problem.space, res.state, res.flags, args.vtk)


if __name__ == "__main__":
    main()
