"""Polarized incoherent excitation of atomic calcium in a weak magnetic field.

A beam along the field axis drives the m = -1 and m = +1 Zeeman sublevels of
the 4p manifold, an effective V-system.  Polarized driving interferes fully
(alignment 1 in the pumping terms) while spontaneous emission into the
isotropic vacuum does not interfere at all, so the emission-interference
amplitude is absent from the equations of motion.  The angular distribution
of the emitted light then exposes the excited-state coherence directly.

Both excited states share one pumping rate r and one linewidth gamma.
Intensities are reported in units of I0 = nbar w0^4 / (32 pi^2 eps0 c^3 R^2).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import (DensityMatrix, Trajectory, TurnOnEnvelope,
                   propagate_envelope)
from .vsystem import (VSystemDerivative, VSystemState, matrix_to_state,
                      state_to_matrix, three_level_generator)

__all__ = [
    "CalciumParams", "polarized_rate", "calcium_rhs", "calcium_generator",
    "generator_pair", "overdamped_analytic", "emission_intensity",
    "angular_intensity", "detection_signals", "detection_coefficients",
    "run_calcium", "CSV_COLUMNS",
]

CSV_COLUMNS = ["t", "rho_gg", "rho_11", "rho_22", "rho_R", "rho_I",
               "Iz", "DA", "DB"]


@dataclass(frozen=True)
class CalciumParams:
    """Zeeman V-system of calcium.

    omega0: transition frequency; delta_z: Zeeman shift of each m = +-1
    level, so the excited splitting is 2*delta_z; gamma: natural linewidth
    per excited state; nbar: photon occupation at omega0; r_iso: isotropic
    pumping rate (the polarized rate is derived from it).
    """

    omega0: float
    delta_z: float
    gamma: float
    nbar: float
    r_iso: float

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be > 0")
        if self.nbar < 0 or self.r_iso < 0:
            raise ValueError("nbar and r_iso must be >= 0")

    @property
    def splitting(self):
        return 2.0 * self.delta_z

    @property
    def r(self):
        return polarized_rate(self.r_iso)


def polarized_rate(r_iso):
    """Pumping rate for a single occupied polarization mode: 3 r_iso / (16 pi)."""
    if r_iso < 0:
        raise ValueError("r_iso must be >= 0")
    return 3.0 * r_iso / (16.0 * np.pi)


def _check_equal_rates(r1, r2, g1, g2):
    if r1 != r2 or g1 != g2:
        raise ValueError("calcium driving requires r1 == r2 and gamma1 == gamma2 "
                         f"(got r = ({r1}, {r2}), gamma = ({g1}, {g2}))")


def calcium_rhs(params, state, envelope_value=1.0, r1=None, r2=None,
                g1=None, g2=None):
    """Polarized equations of motion.

    Identical to the fully aligned V-system except that the
    emission-interference amplitude (the sqrt(gamma1*gamma2) contribution)
    vanishes: spontaneous emission goes into orthogonal vacuum modes.  The
    optional per-level rates exist only so unequal inputs are rejected
    explicitly.
    """
    r1 = params.r if r1 is None else r1
    r2 = params.r if r2 is None else r2
    g1 = params.gamma if g1 is None else g1
    g2 = params.gamma if g2 is None else g2
    _check_equal_rates(r1, r2, g1, g2)
    r = envelope_value * r1
    gamma = g1
    delta = params.splitting
    sr = r  # sqrt(r1 r2) with equal rates
    d11 = r * state.rho_gg - (r + gamma) * state.rho_11 - sr * state.rho_R
    d22 = r * state.rho_gg - (r + gamma) * state.rho_22 - sr * state.rho_R
    gamma_c = r + gamma  # (r1 + r2 + g1 + g2)/2
    dR = (sr * state.rho_gg + delta * state.rho_I - gamma_c * state.rho_R
          - 0.5 * sr * (state.rho_11 + state.rho_22))
    dI = -delta * state.rho_R - gamma_c * state.rho_I
    return VSystemDerivative(-(d11 + d22), d11, d22, dR, dI)


def calcium_generator(params, pump_scale=1.0):
    """3x3 generator: pump interference = sqrt(r1 r2), no decay interference."""
    r = params.r
    return three_level_generator(
        params.splitting, r, r, params.gamma, params.gamma,
        stimulated=True, pump_cross=r, decay_cross=0.0, pump_scale=pump_scale)


def generator_pair(params):
    l_full = calcium_generator(params, pump_scale=1.0)
    l_dark = calcium_generator(params, pump_scale=0.0)
    return l_dark, l_full - l_dark


def secular_generator_pair(params):
    r = params.r
    build = lambda s: three_level_generator(
        params.splitting, r, r, params.gamma, params.gamma,
        stimulated=True, pump_cross=0.0, decay_cross=0.0, pump_scale=s)
    l_full, l_dark = build(1.0), build(0.0)
    return l_dark, l_full - l_dark


def overdamped_analytic(t, r, gamma, delta=0.0):
    """Small-splitting weak-pumping dynamics after a sudden turn-on.

    Returns (rho_ii, rho_sec, rho_nonsec): the excited populations rise as
    (r/gamma)(1 - e^{-gamma t}); the secular coherence stays zero; the
    non-secular coherence tracks the populations.  A warning is attached
    outside the small-splitting regime (delta/gamma > 0.1), where these
    asymptotic forms degrade.
    """
    if delta / gamma > 0.1:
        warnings.warn(f"delta/gamma = {delta / gamma:.3g} > 0.1: outside the "
                      "validity regime of the overdamped closed forms")
    t = np.asarray(t, dtype=float)
    rho_ii = (r / gamma) * -np.expm1(-gamma * t)
    rho_sec = np.zeros_like(rho_ii)
    return rho_ii, rho_sec, rho_ii.copy()


def angular_intensity(state, theta, phi):
    """Emission intensity toward (theta, phi) in units of I0."""
    pops = state.rho_11 + state.rho_22
    return (0.5 * (1.0 + np.cos(theta) ** 2) * pops
            + np.sin(theta) ** 2 * (state.rho_R * np.cos(2.0 * phi)
                                    - state.rho_I * np.sin(2.0 * phi)))


def emission_intensity(point, t, trajectory, absolute_timing=False,
                       speed_of_light=1.0):
    """Intensity at detector position (R, theta, phi) and detector time t.

    By default the trajectory is sampled at t directly (the R/c offset is a
    pure relabeling for a single emitter); with ``absolute_timing`` the
    emission-time convention t' = t + R/c is applied literally.
    """
    radius, theta, phi = point
    t_eval = t + radius / speed_of_light if absolute_timing else t
    times = trajectory.times
    if not (times[0] <= t_eval <= times[-1]):
        raise ValueError(f"evaluation time {t_eval} outside trajectory range")
    cols = [np.interp(t_eval, times, trajectory.observables[k])
            for k in ("rho_gg", "rho_11", "rho_22", "rho_R", "rho_I")]
    # interpolated columns may break exact trace normalization; renormalize
    tr = cols[0] + cols[1] + cols[2]
    state = VSystemState(cols[0] / tr, cols[1] / tr, cols[2] / tr,
                         cols[3], cols[4])
    return angular_intensity(state, theta, phi)


def detection_signals(state):
    """(I_z, D_A, D_B) in units of I0.

    I_z integrates over the full sphere; D_A and D_B are quarter-sphere
    differences I_A - I_A' and I_B - I_B' picking out the real and (minus)
    the imaginary part of the coherence.
    """
    i_z = (8.0 * np.pi / 3.0) * (state.rho_11 + state.rho_22)
    d_a = (16.0 / 3.0) * state.rho_R
    d_b = -(16.0 / 3.0) * state.rho_I
    return i_z, d_a, d_b


def _gauss(lo, hi, n=64):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (hi - lo) * x + 0.5 * (hi + lo), 0.5 * (hi - lo) * w


def detection_coefficients(region, n_nodes=64):
    """Solid-angle integrals of the three angular basis functions.

    ``region`` is 'full', 'A', or 'B'.  Returns (population, rho_R, rho_I)
    coefficients from direct Gauss-Legendre quadrature of the angular
    emission pattern, the independent check on the closed-form detection
    signals.
    """
    if region == "full":
        phi_ranges = [(0.0, 2.0 * np.pi)]
    elif region == "A":
        phi_ranges = [(-np.pi / 4, np.pi / 4), (3 * np.pi / 4, 5 * np.pi / 4)]
    elif region == "B":
        phi_ranges = [(0.0, np.pi / 2), (np.pi, 3 * np.pi / 2)]
    else:
        raise ValueError(f"unknown region {region!r}")
    theta, w_t = _gauss(0.0, np.pi, n_nodes)
    pop_t = np.sum(w_t * 0.5 * (1.0 + np.cos(theta) ** 2) * np.sin(theta))
    coh_t = np.sum(w_t * np.sin(theta) ** 3)
    pop = coh_r = coh_i = 0.0
    for lo, hi in phi_ranges:
        phi, w_p = _gauss(lo, hi, n_nodes)
        pop += pop_t * (hi - lo)
        coh_r += coh_t * np.sum(w_p * np.cos(2 * phi))
        coh_i -= coh_t * np.sum(w_p * np.sin(2 * phi))
    return pop, coh_r, coh_i


def run_calcium(params, times, envelope=None, secular=False,
                initial=None, rtol=1e-8, atol=1e-12):
    """Propagate the polarized equations; Trajectory carries the CSV columns."""
    envelope = envelope or TurnOnEnvelope()
    initial = initial or VSystemState.ground()
    rho0 = DensityMatrix(state_to_matrix(initial))
    pair = secular_generator_pair(params) if secular else generator_pair(params)
    traj = propagate_envelope(pair[0], pair[1], envelope, rho0, times,
                              rtol=rtol, atol=atol)
    reduced = [matrix_to_state(st) for st in traj.states]
    obs = {name: np.array([getattr(s, name) for s in reduced])
           for name in ("rho_gg", "rho_11", "rho_22", "rho_R", "rho_I")}
    signals = np.array([detection_signals(s) for s in reduced])
    obs["Iz"], obs["DA"], obs["DB"] = signals[:, 0], signals[:, 1], signals[:, 2]
    return Trajectory(traj.times, traj.states, obs)
