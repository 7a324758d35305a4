"""Bohr coefficients of the exact Burgers solution for the spectrum-containment datum.

u0(x) = sin(2 pi x) + 0.5 sin(2 pi 99/70 x) is 70-periodic, so the Hopf-Lax
formula gives u(t) exactly (up to the y-grid) and its mean against
exp(-2 pi i lambda x) over four periods is the Bohr coefficient a_lambda
for every lambda in (1/140)Z.
The numbers are compared with the direct solver at the scenario defaults.

    python3 scripts/spectrum_in_probe_oracle.py [--t 1.0] [--spu 64]
"""

import argparse

import numpy as np

from aphj.apfunc import SampledLine
from aphj.asymptotics import hopf_lax_oracle
from aphj.hamiltonian import Hamiltonian
from aphj.hjsolve import SolveConfig, solve_direct_1d

PERIOD = 70.0


def u0(x):
    return np.sin(2 * np.pi * x) + 0.5 * np.sin(2 * np.pi * 99 / 70 * x)


def coefficient(values, x, lam, copies=4):
    # mean over 4 periods, exact for every lambda in (1/140)Z
    xs = np.concatenate([x + k * PERIOD for k in range(copies)])
    return abs(np.mean(np.tile(values, copies) * np.exp(-2j * np.pi * lam * xs)))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--t", type=float, default=1.0)
    ap.add_argument("--spu", type=int, default=64, help="samples per unit length")
    args = ap.parse_args()
    n = int(PERIOD * args.spu)
    x = np.arange(n) * (PERIOD / n)
    exact = hopf_lax_oracle(u0, args.t, x, period=PERIOD, resolution=n)
    line = SampledLine.from_function(u0, PERIOD, n)
    solved = solve_direct_1d(line, Hamiltonian.quadratic(), SolveConfig(scheme="upwind", t_final=args.t))[-1]
    print(f"t={args.t}  samples/unit={args.spu}  linf(solver - oracle)={np.max(np.abs(solved.values - exact)):.3e}")
    print(f"{'lambda':>10} {'|a| oracle':>12} {'|a| solver':>12} {'|a| at t=0':>12}")
    for lam in (1.0, 99 / 70, 1 / 70, 2 / 70, 29 / 70, 71 / 140):
        print(f"{lam:10.5f} {coefficient(exact, x, lam):12.5f} {coefficient(solved.values, x, lam):12.5f} "
              f"{coefficient(u0(x), x, lam):12.5f}")


if __name__ == "__main__":
    main()
