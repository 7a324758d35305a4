"""Traveling-wave profile for the plateau Hamiltonian at a range of amplitudes.

For small data the gradient stays inside the linear interval (-0.3, 0.3)
and the solution is an exact transport; larger data leave the plateau and
the profile flattens until its slopes fit inside (a, b).

    python3 scripts/plateau_wave.py [--amps 0.02 0.05 0.1 0.2]
"""

import argparse

from aphj.scenarios import run_named


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--amps", type=float, nargs="+", default=[0.02, 0.05, 0.1, 0.2])
    ap.add_argument("--grid-n", type=int, default=400)
    args = ap.parse_args()
    print("amp,certificate,sup_distance,lipschitz_ok,profile_range,offset")
    for amp in args.amps:
        init = '{"modes": [{"kind": "sin", "amp": %r, "freq": 1}]}' % amp
        res = run_named("traveling-wave-plateau", [f"initial={init}", f"solve.grid_n={args.grid_n}"])
        v, p = res.verdict, res.params
        print(f"{amp},{v['certificate']:.3e},{v['sup_distance']:.3e},{v['lipschitz_ok']},"
              f"{p.get('profile_range', float('nan')):.4f},{p.get('offset', float('nan')):.5f}")


if __name__ == "__main__":
    main()
