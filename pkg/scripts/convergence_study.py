"""Grid convergence of the 1-D solvers against the Hopf-Lax oracle (H = p^2/2).

    python3 scripts/convergence_study.py [--t 0.5] [--grids 100 200 400 800 1600]
"""

import argparse

import numpy as np

from aphj.apfunc import SampledLine
from aphj.asymptotics import hopf_lax_oracle
from aphj.hamiltonian import Hamiltonian
from aphj.hjsolve import SolveConfig, solve_direct_1d


def u0(x):
    return np.sin(2 * np.pi * x) / (2 * np.pi)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--t", type=float, default=0.5)
    ap.add_argument("--grids", type=int, nargs="+", default=[100, 200, 400, 800, 1600])
    args = ap.parse_args()
    print("scheme,grid_n,linf_error,observed_order")
    for scheme in ("lax_friedrichs", "upwind"):
        prev = None
        for n in args.grids:
            snap = solve_direct_1d(SampledLine.from_function(u0, 1.0, n), Hamiltonian.quadratic(),
                                   SolveConfig(scheme=scheme, t_final=args.t))[-1]
            err = float(np.max(np.abs(snap.values - hopf_lax_oracle(u0, args.t, snap.x, period=1.0, resolution=n))))
            order = "" if prev is None else f"{np.log2(prev / err):.3f}"
            print(f"{scheme},{n},{err:.6e},{order}")
            prev = err


if __name__ == "__main__":
    main()
