#!/usr/bin/env python3
"""Desk-scale retinal run: secular vs non-secular excitation, one ramp sweep.

Uses the shipped desk-scale reference parameters.  Prints the bright-pair
coherence ratio at early times, its transient maximum for each turn-on
time, and the final quantum yield for both treatments of the excitation.
"""

import argparse

import numpy as np

import _path  # noqa: F401
from nicoh import retinal as rt
from nicoh.core import TurnOnEnvelope


def build(secular):
    params = rt.TwoStateTwoModeParams(e0=0.0, e1=2.48, v0=3.6, v1=1.09,
                                      omega=0.19, kappa=0.1, lam=0.19,
                                      inv_inertia=2.42e-2)
    h, space = rt.build_2s2m_hamiltonian(params, 48, 16)
    basis = rt.vibronic_eigenbasis(h, space, params, 150)
    rad = rt.RadiativeConfig(temperature=5800.0, mu=0.3, secular=secular,
                             cluster_tol=0.02)
    phon = rt.PhononConfig(temperature=278.0, eta=0.01, omega_c=0.19)
    return basis, rt.DissipationConfig(rad, phon)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t-final", type=float, default=240.0)
    args = ap.parse_args()
    times = np.concatenate([[0.0, 0.005], np.linspace(1.0, args.t_final, 80)])

    for secular in (False, True):
        basis, cfg = build(secular)
        bright = rt.select_pair(basis, "bright", 0.02)
        key = f"pair_{bright[0]}_{bright[1]}"
        traj = rt.run_retinal_scenario(basis, cfg, TurnOnEnvelope("sudden"),
                                       times, {"bright": bright})
        c = traj.observables[key + "_C"]
        label = "secular" if secular else "non-secular"
        print(f"{label}: bright pair {bright}, C(0+) = {c[1]:.3e}, "
              f"final Y1 = {traj.observables['Y1'][-1]:.4f}")

    basis, cfg = build(False)
    bright = rt.select_pair(basis, "bright", 0.02)
    key = f"pair_{bright[0]}_{bright[1]}"
    for tau_r in (0.0, 1000.0, 3000.0, 10000.0):
        env = (TurnOnEnvelope("exponential", tau_r) if tau_r > 0
               else TurnOnEnvelope("sudden"))
        horizon = max(args.t_final, 2.5 * tau_r)
        sweep_times = np.concatenate([[0.0, 0.005],
                                      np.linspace(1.0, horizon, 60)])
        traj = rt.run_retinal_scenario(basis, cfg, env, sweep_times,
                                       {"bright": bright}, rtol=1e-7)
        print(f"tau_r = {tau_r:6g}: max C = "
              f"{traj.observables[key + '_C'].max():.4f}")


if __name__ == "__main__":
    main()
