#!/usr/bin/env python3
"""Steady-state energy current of the two-qubit transport model.

Sweeps the hot-bath temperature and the coherent coupling, printing the
current (positive = hot left to cold right) and the sustaining coherence.
"""

import argparse

import numpy as np

import _path  # noqa: F401
from nicoh.core import steady_state
from nicoh.dimer import DimerParams, dimer_generator, steady_current


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--j", type=float, default=0.1)
    ap.add_argument("--t-right", type=float, default=0.3)
    args = ap.parse_args()

    print(f"{'T_left':>8} {'J':>6} {'current':>12} {'|rho_12|':>12}")
    for t_left in (0.3, 0.5, 1.0, 2.0, 4.0):
        params = DimerParams(omega_l=1.0, omega_r=1.0, j=args.j,
                             t_left=t_left, t_right=args.t_right)
        current = steady_current(params, 0.8, 0.6)
        rho = steady_state(dimer_generator(params, 0.8, 0.6))
        coh = abs(rho.elements[1, 2])
        print(f"{t_left:8.2f} {args.j:6.3f} {current:12.4e} {coh:12.4e}")


if __name__ == "__main__":
    main()
