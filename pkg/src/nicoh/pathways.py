"""First-order excitation pathways for arbitrary field statistics.

A weak field drives a ground state into a manifold of excited states.  The
single-realization amplitude is a one-dimensional phase integral over the
field; averaging the projector over field realizations leaves a double time
integral weighted by the first-order field correlation function.  In the
white-noise limit only simultaneous excitations survive and the double
integral collapses to a single one, which is where noise-induced coherence
comes from: the relative phase of simultaneously excited states is set by
transition-dipole geometry alone.

Outputs of the averaged routines are unnormalized first-order excited-state
blocks; the ground-state amplitude is not depleted at this order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FieldCorrelation", "ExcitationManifold", "FieldRealization",
    "QuadratureError", "g1", "correlation_kernel", "first_order_amplitudes",
    "averaged_first_order_rho", "white_noise_rho",
    "phase_diffusion_realization", "monte_carlo_rho",
]


class QuadratureError(RuntimeError):
    """A quadrature failed to reach the requested accuracy."""


@dataclass(frozen=True)
class FieldCorrelation:
    """First-order field statistics.

    kind 'delta': vanishing coherence time (white noise); 'exponential':
    g1(tau) = exp(-tau/tau_c); 'monochromatic': perfectly coherent carrier
    at ``omega``.  ``amplitude`` is the intensity scale |E|^2.
    """

    kind: str
    amplitude: float = 1.0
    tau_c: float | None = None
    omega: float | None = None

    def __post_init__(self):
        if self.kind not in ("delta", "exponential", "monochromatic"):
            raise ValueError(f"unknown correlation kind {self.kind!r}")
        if self.amplitude < 0:
            raise ValueError("amplitude must be >= 0")
        if self.kind == "exponential" and (self.tau_c is None or self.tau_c <= 0):
            raise ValueError("exponential correlation requires tau_c > 0")
        if self.kind == "monochromatic" and self.omega is None:
            raise ValueError("monochromatic correlation requires omega")


def g1(corr, tau):
    """Normalized first-order coherence at delay tau >= 0.

    delta: 1 at tau = 0 and 0 otherwise (distributional limit); exponential:
    exp(-tau/tau_c); monochromatic: 1 (perfectly coherent at all delays).
    """
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("tau must be >= 0")
    if corr.kind == "delta":
        out = np.where(tau == 0.0, 1.0, 0.0)
    elif corr.kind == "exponential":
        out = np.exp(-tau / corr.tau_c)
    else:
        out = np.ones_like(tau)
    return complex(out) if out.ndim == 0 else out.astype(complex)


def correlation_kernel(corr, tau1, tau2):
    """<E*(tau1) E(tau2)> including the carrier phase for the coherent kind."""
    if corr.kind == "monochromatic":
        return corr.amplitude * np.exp(1j * corr.omega * (np.asarray(tau2) - np.asarray(tau1)))
    return corr.amplitude * g1(corr, np.abs(np.asarray(tau2) - np.asarray(tau1)))


@dataclass(frozen=True)
class ExcitationManifold:
    """Excited energies (ground at 0) and transition-dipole 3-vectors."""

    omegas: np.ndarray
    dipoles: np.ndarray

    def __post_init__(self):
        omegas = np.atleast_1d(np.asarray(self.omegas, dtype=float))
        dipoles = np.atleast_2d(np.asarray(self.dipoles, dtype=complex))
        if len(omegas) < 1:
            raise ValueError("manifold needs at least one excited state")
        if dipoles.shape != (len(omegas), 3):
            raise ValueError(f"dipoles must be ({len(omegas)}, 3), got {dipoles.shape}")
        if not np.all(np.isfinite(dipoles)):
            raise ValueError("dipole vectors must be finite")
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "dipoles", dipoles)

    @property
    def n_excited(self):
        return len(self.omegas)


@dataclass(frozen=True)
class FieldRealization:
    """A sampled complex field (3-vector over a time grid)."""

    times: np.ndarray
    values: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (len(t), 3):
            raise ValueError("values must have shape (n_times, 3)")
        if len(t) < 3 or not np.all(np.diff(t) > 0):
            raise ValueError("need an ascending grid of at least 3 samples")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)


def phase_diffusion_realization(amplitude, tau_c, times, seed,
                                polarization=(1.0, 0.0, 0.0), omega=0.0):
    """Constant-intensity field with a diffusing phase.

    The phase performs a discretized Wiener walk with diffusion constant
    2/tau_c, which reproduces g1(tau) = exp(-tau/tau_c) exactly in the
    ensemble.  Deterministic given (seed, grid).
    """
    times = np.asarray(times, dtype=float)
    rng = np.random.default_rng(seed)
    dt = np.diff(times)
    steps = rng.normal(size=len(dt)) * np.sqrt(2.0 * dt / tau_c)
    phase = np.concatenate([[0.0], np.cumsum(steps)])
    scalar = np.sqrt(amplitude) * np.exp(1j * (omega * times + phase))
    pol = np.asarray(polarization, dtype=complex)
    return FieldRealization(times, np.outer(scalar, pol), seed=seed)


def _trapezoid_richardson(values, times, rel_tol=1e-6):
    """Trapezoid integral with a Richardson error estimate from the half grid.

    The coarse grid takes every other sample (keeping the final point so
    both integrals share the full window).  Raises QuadratureError when the
    estimated error exceeds rel_tol relative to the result magnitude.
    """
    n = len(times)
    if n < 3:
        raise QuadratureError("grid too short for refinement estimate")
    idx = np.arange(0, n, 2)
    if idx[-1] != n - 1:
        idx = np.append(idx, n - 1)
    last_axis = -1 if np.ndim(values) > 1 else 0
    fine = np.trapz(values, times, axis=last_axis)
    coarse = np.trapz(values[..., idx] if np.ndim(values) > 1 else values[idx],
                      times[idx], axis=last_axis)
    correction = (fine - coarse) / 3.0
    refined = fine + correction
    scale = max(float(np.max(np.abs(refined))), 1e-300)
    worst = float(np.max(np.abs(correction)))
    if worst > rel_tol * scale and worst > 1e-14:
        raise QuadratureError(
            f"estimated quadrature error {worst / scale:.2e} exceeds "
            f"{rel_tol:.1e}; refine the grid")
    return refined


def first_order_amplitudes(realization, manifold, t0, t, rel_tol=1e-6):
    """Amplitude picked up by each excited state over [t0, t].

    <e_n|psi(t)> = int_{t0}^{t} dt' exp(-i e_n (t'-t0)) E(t') . mu_n,
    evaluated by trapezoid quadrature with Richardson refinement on the
    realization grid.
    """
    if t < t0:
        raise ValueError("t must be >= t0")
    times = realization.times
    if t0 < times[0] - 1e-12 or t > times[-1] + 1e-12:
        raise ValueError("realization does not cover [t0, t]")
    mask = (times >= t0 - 1e-12) & (times <= t + 1e-12)
    tt = times[mask]
    ev = realization.values[mask]
    proj = ev @ manifold.dipoles.T                      # (n_t, n_excited)
    phases = np.exp(-1j * np.outer(tt - t0, manifold.omegas))
    return _trapezoid_richardson((phases * proj).T, tt, rel_tol=rel_tol)


def _phase_matrix(manifold, t):
    w = manifold.omegas
    return np.exp(-1j * np.subtract.outer(w, w) * t)


def _geometry(manifold, polarization=None):
    mu = manifold.dipoles
    if polarization is None:
        return mu @ mu.conj().T
    eps = np.asarray(polarization, dtype=complex)
    amp = mu @ eps
    return np.outer(amp, amp.conj())


def white_noise_rho(manifold, amplitude, t0, t, envelope=None, n_grid=2001,
                    polarization=None):
    """Excited-state block for a delta-correlated field.

    Single time integral of the intensity against the beat phases; constant
    intensity uses the closed forms (t - t0 on the diagonal, finite
    oscillatory quotients off it).
    """
    if t < t0:
        raise ValueError("t must be >= t0")
    w = manifold.omegas
    wab = np.subtract.outer(w, w)
    if envelope is None:
        span = t - t0
        with np.errstate(divide="ignore", invalid="ignore"):
            integral = np.where(
                wab == 0.0, span,
                (np.exp(1j * wab * t) - np.exp(1j * wab * t0)) / (1j * wab))
    else:
        tt = np.linspace(t0, t, n_grid)
        intensity = envelope.value(tt)
        kernel = np.exp(1j * wab[..., None] * tt) * intensity
        integral = np.trapz(kernel, tt, axis=-1)
    geom = _geometry(manifold, polarization)
    return geom * amplitude * _phase_matrix(manifold, t) * integral


def _exponential_inner(corr, w_beta, tau2, t0, t):
    """Analytic inner integral of exp(-i w tau1) exp(-|tau1-tau2|/tau_c)."""
    inv = 1.0 / corr.tau_c
    a = inv - 1j * w_beta   # rising branch, tau1 < tau2
    b = -inv - 1j * w_beta  # falling branch, tau1 > tau2
    rising = (np.exp(-inv * tau2) / a) * (np.exp(a * tau2) - np.exp(a * t0))
    falling = (np.exp(inv * tau2) / b) * (np.exp(b * t) - np.exp(b * tau2))
    return rising + falling


def averaged_first_order_rho(corr, manifold, t0, t, n_grid=1001,
                             polarization=None, rel_tol=1e-6):
    """Field-averaged excited-state block (unnormalized first-order result).

    rho_ab = (mu_a . mu_b*) e^{-i w_ab t} double-int e^{i w_a tau2 - i w_b tau1}
    <E*(tau1) E(tau2)>.  The delta kind routes to the single-integral form;
    the exponential kind integrates its inner variable analytically and the
    outer one by trapezoid with Richardson refinement; the monochromatic
    kind separates into closed-form one-dimensional factors.
    """
    if t < t0:
        raise ValueError("t must be >= t0")
    if corr.kind == "delta":
        return white_noise_rho(manifold, corr.amplitude, t0, t,
                               polarization=polarization)
    w = manifold.omegas
    geom = _geometry(manifold, polarization)
    phase = _phase_matrix(manifold, t)
    if corr.kind == "monochromatic":
        wc = corr.omega
        with np.errstate(divide="ignore", invalid="ignore"):
            nu = w + wc
            f = np.where(nu == 0.0, t - t0,
                         (np.exp(1j * nu * t) - np.exp(1j * nu * t0)) / (1j * nu))
        integral = np.outer(f, f.conj())
        return geom * corr.amplitude * phase * integral

    if n_grid % 2 == 0:
        n_grid += 1
    tau2 = np.linspace(t0, t, n_grid)
    n = manifold.n_excited
    out = np.zeros((n, n), dtype=complex)
    inner = {wb: _exponential_inner(corr, wb, tau2, t0, t) for wb in w}
    for a in range(n):
        outer_phase = np.exp(1j * w[a] * tau2)
        for b in range(n):
            integrand = outer_phase * inner[w[b]]
            out[a, b] = _trapezoid_richardson(integrand, tau2, rel_tol=rel_tol)
    out = geom * corr.amplitude * phase * out
    return 0.5 * (out + out.conj().T)


def monte_carlo_rho(corr, manifold, t0, t, n_samples, seed=0, n_grid=801,
                    polarization=(1.0, 0.0, 0.0)):
    """Phase-diffusion sampling oracle for the exponential correlation.

    Averages the projector of the first-order amplitudes over seeded
    realizations; returns (mean matrix, elementwise standard error).
    """
    if corr.kind != "exponential":
        raise ValueError("sampling model implements the exponential kind")
    times = np.linspace(t0, t, n_grid)
    dt = np.diff(times)
    eps = np.asarray(polarization, dtype=complex)
    projected_dipoles = manifold.dipoles @ eps
    kernels = np.exp(-1j * np.outer(times - t0, manifold.omegas))
    n = manifold.n_excited
    sum_x = np.zeros((n, n), dtype=complex)
    sum_abs2 = np.zeros((n, n))
    rng = np.random.default_rng(seed)
    done = 0
    while done < n_samples:
        batch = min(512, n_samples - done)
        steps = rng.normal(size=(batch, len(dt))) * np.sqrt(2.0 * dt / corr.tau_c)
        phases = np.concatenate([np.zeros((batch, 1)), np.cumsum(steps, axis=1)],
                                axis=1)
        scalar = np.sqrt(corr.amplitude) * np.exp(1j * phases)
        proj = scalar[:, :, None] * projected_dipoles[None, None, :]
        amps = np.trapz(kernels[None, :, :] * proj, times, axis=1)
        outer = amps[:, :, None] * amps.conj()[:, None, :]
        sum_x += outer.sum(axis=0)
        sum_abs2 += (np.abs(outer) ** 2).sum(axis=0)
        done += batch
    mean = sum_x / n_samples
    var = (sum_abs2 / n_samples - np.abs(mean) ** 2)
    var *= n_samples / max(n_samples - 1, 1)
    stderr = np.sqrt(np.maximum(var, 0.0) / n_samples)
    return mean, stderr
