"""Scenario runners: parsed config in, CSV table and summary observables out.

Each runner returns (header, rows, summary) where rows are plain float
lists.  Floats are serialized with repr (shortest round-trip), which keeps
repeated runs byte-identical.
"""

from __future__ import annotations

import numpy as np

from . import calcium as ca
from . import dimer as dm
from . import pathways as pw
from . import retinal as rt
from . import vsystem as vs
from .core import TurnOnEnvelope, steady_state

__all__ = ["run_scenario", "format_csv"]


def _grid(config):
    return np.linspace(0.0, config["t_final"], config["n_points"])


def _envelope(config):
    if config.get("envelope", "sudden") == "exponential":
        return TurnOnEnvelope("exponential", config["tau_r"])
    return TurnOnEnvelope("sudden")


def _run_vsystem(config):
    params = vs.VSystemParams(
        delta=config["delta"], r1=config["r1"], r2=config["r2"],
        g1=config["g1"], g2=config["g2"], p=config["p"],
        stimulated_decay=config["stimulated_decay"])
    traj = vs.run_vsystem(params, _grid(config), envelope=_envelope(config),
                          secular=config["secular"],
                          rtol=config["rtol"], atol=config["atol"])
    header = ["t", "rho_gg", "rho_11", "rho_22", "rho_R", "rho_I"]
    obs = traj.observables
    rows = [[t] + [obs[k][i] for k in header[1:]]
            for i, t in enumerate(traj.times)]
    ss = vs.vsystem_steady_state(params)
    summary = {
        "ss_rho_gg": ss.rho_gg, "ss_rho_11": ss.rho_11, "ss_rho_22": ss.rho_22,
        "ss_rho_R": ss.rho_R, "ss_rho_I": ss.rho_I,
        "ss_abs_rho_12": float(np.hypot(ss.rho_R, ss.rho_I)),
    }
    return header, rows, summary


def _run_calcium(config):
    params = ca.CalciumParams(
        omega0=config["omega0"], delta_z=config["delta_z"],
        gamma=config["gamma"], nbar=config["nbar"], r_iso=config["r_iso"])
    traj = ca.run_calcium(params, _grid(config), envelope=_envelope(config),
                          secular=config["secular"],
                          rtol=config["rtol"], atol=config["atol"])
    header = list(ca.CSV_COLUMNS)
    obs = traj.observables
    rows = [[t] + [obs[k][i] for k in header[1:]]
            for i, t in enumerate(traj.times)]
    ss = vs.matrix_to_state(steady_state(ca.calcium_generator(params)))
    iz, da, db = ca.detection_signals(ss)
    summary = {"ss_rho_R": ss.rho_R, "ss_rho_I": ss.rho_I,
               "ss_abs_rho_12": float(np.hypot(ss.rho_R, ss.rho_I)),
               "ss_Iz": iz, "ss_DA": da, "ss_DB": db}
    return header, rows, summary


def _run_dimer(config):
    params = dm.DimerParams(
        omega_l=config["omega_l"], omega_r=config["omega_r"], j=config["j"],
        t_left=config["t_left"], t_right=config["t_right"])
    gamma_l, gamma_r = config["gamma_l"], config["gamma_r"]
    gen = dm.dimer_generator(params, gamma_l, gamma_r)
    from .core import DensityMatrix, propagate
    rho0 = DensityMatrix.pure([1.0, 0.0, 0.0])
    traj = propagate(gen, rho0, _grid(config),
                     rtol=config["rtol"], atol=config["atol"])
    header = ["t", "rho_gg", "rho_11", "rho_22", "rho_R", "rho_I", "current"]
    rows = []
    for t, state in zip(traj.times, traj.states):
        m = state.elements
        rows.append([t, m[0, 0].real, m[1, 1].real, m[2, 2].real,
                     m[1, 2].real, m[1, 2].imag,
                     dm.energy_current(params.j, state, params=params)])
    current = dm.steady_current(params, gamma_l, gamma_r)
    ss = steady_state(gen)
    summary = {"ss_current": current,
               "ss_abs_rho_12": float(abs(ss.elements[1, 2]))}
    return header, rows, summary


def _run_retinal(config):
    params = rt.TwoStateTwoModeParams(
        e0=config["E0"], e1=config["E1"], v0=config["V0"], v1=config["V1"],
        omega=config["omega"], kappa=config["kappa"], lam=config["lambda"],
        inv_inertia=config["inv_inertia"])
    h, space = rt.build_2s2m_hamiltonian(params, config["n_fourier"],
                                         config["n_ho"])
    basis = rt.vibronic_eigenbasis(h, space, params, config["n_keep"])
    cluster_tol = config["cluster_tol"]
    rad = rt.RadiativeConfig(
        temperature=config["T_rad"], mu=config["mu"],
        secular=config["secular"],
        cluster_tol=None if cluster_tol < 0 else cluster_tol)
    resolved_tol = (rt.default_cluster_tol(basis, rad)
                    if cluster_tol < 0 else cluster_tol)
    phon = rt.PhononConfig(temperature=config["T_phon"], eta=config["eta"],
                           omega_c=config["omega_c"])
    tracked = {label: rt.select_pair(basis, label, resolved_tol)
               for label in config["track"]}
    envelope = (TurnOnEnvelope("exponential", config["tau_r"])
                if config["tau_r"] > 0 else TurnOnEnvelope("sudden"))
    traj = rt.run_retinal_scenario(basis, rt.DissipationConfig(rad, phon),
                                   envelope, _grid(config), tracked,
                                   rtol=config["rtol"], atol=config["atol"])
    header = ["t", "Y1"]
    pair_cols = []
    for label in config["track"]:
        i, j = tracked[label]
        for suffix in ("rho_ii", "rho_jj", "abs_rho_ij", "C"):
            header.append(f"pair_{i}_{j}_{suffix}")
            pair_cols.append(f"pair_{i}_{j}_{suffix}")
    obs = traj.observables
    rows = [[t, obs["Y1"][i]] + [obs[c][i] for c in pair_cols]
            for i, t in enumerate(traj.times)]
    summary = {"final_Y1": float(obs["Y1"][-1])}
    for label in config["track"]:
        i, j = tracked[label]
        summary[f"{label}_pair"] = f"{i}:{j}"
        summary[f"final_{label}_C"] = float(obs[f"pair_{i}_{j}_C"][-1])
    return header, rows, summary


def _run_pathways(config):
    omegas = config["omegas"]
    flat = config["dipoles"]
    if len(flat) != 3 * len(omegas):
        raise ValueError("dipoles must supply 3 components per excited state")
    manifold = pw.ExcitationManifold(
        omegas=np.asarray(omegas),
        dipoles=np.asarray(flat, dtype=complex).reshape(-1, 3))
    kind = config["corr_kind"]
    corr = pw.FieldCorrelation(
        kind, amplitude=config["amplitude"],
        tau_c=config["tau_c"] if kind == "exponential" else None,
        omega=config["carrier_omega"] if kind == "monochromatic" else None)
    pol = np.asarray(config["polarization"], dtype=complex)
    times = _grid(config)
    n = manifold.n_excited
    header = ["t"]
    for a in range(n):
        for b in range(a, n):
            header.append(f"rho_{a}_{b}_re")
            header.append(f"rho_{a}_{b}_im")
    rows = []
    for t in times:
        if t == times[0]:
            block = np.zeros((n, n), dtype=complex)
        else:
            block = pw.averaged_first_order_rho(corr, manifold, times[0], t,
                                                polarization=pol)
        row = [t]
        for a in range(n):
            for b in range(a, n):
                row.extend([block[a, b].real, block[a, b].imag])
        rows.append(row)
    block = (pw.averaged_first_order_rho(corr, manifold, times[0], times[-1],
                                         polarization=pol)
             if times[-1] > times[0] else np.zeros((n, n)))
    summary = {"final_population_sum": float(np.trace(block).real)}
    return header, rows, summary


_RUNNERS = {
    "vsystem": _run_vsystem,
    "calcium": _run_calcium,
    "dimer": _run_dimer,
    "retinal": _run_retinal,
    "pathways": _run_pathways,
}


def run_scenario(config):
    return _RUNNERS[config.scenario](config)


def format_csv(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"
