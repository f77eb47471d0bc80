#!/usr/bin/env python3
"""Turn-on sweep for the V-system: sudden, intermediate, and slow ramps.

Reproduces the qualitative turn-on story in both damping regimes: transient
coherences shrink as the intensity ramp slows, leaving only the stationary
coherence.  Writes one CSV per (regime, tau_r) into --out.
"""

import argparse
from pathlib import Path

import numpy as np

import _path  # noqa: F401
from nicoh.core import TurnOnEnvelope
from nicoh.vsystem import VSystemParams, coherence_survival_time, run_vsystem


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out_vsystem")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    regimes = {
        "underdamped": VSystemParams(delta=24.0, r1=0.05, r2=0.05,
                                     g1=1.0, g2=1.0, p=1.0),
        "overdamped": VSystemParams(delta=0.001, r1=0.05, r2=0.05,
                                    g1=1.0, g2=1.0, p=1.0),
    }
    for name, params in regimes.items():
        tau_delta = 1.0 / abs(params.delta)
        ramps = [0.0, 24.0 * tau_delta, 100.0]
        if name == "overdamped":
            ramps = [0.0, 100.0, 20.0 * coherence_survival_time(params)]
        for tau_r in ramps:
            env = (TurnOnEnvelope("exponential", tau_r) if tau_r > 0
                   else TurnOnEnvelope("sudden"))
            t_final = max(10.0, 3.0 * tau_r)
            times = np.linspace(0.0, t_final, 1201)
            traj = run_vsystem(params, times, envelope=env)
            path = out / f"{name}_tau_{tau_r:g}.csv"
            cols = ["rho_gg", "rho_11", "rho_22", "rho_R", "rho_I"]
            with path.open("w") as fh:
                fh.write("t," + ",".join(cols) + "\n")
                for i, t in enumerate(times):
                    fh.write(",".join(
                        [repr(float(t))] +
                        [repr(float(traj.observables[c][i])) for c in cols]) + "\n")
            peak = np.max(np.abs(traj.observables["rho_R"]
                                 - traj.observables["rho_R"][-1]))
            print(f"{name} tau_r={tau_r:g}: transient coherence peak {peak:.3e}"
                  f" -> {path}")


if __name__ == "__main__":
    main()
