"""Time steppers for vectorized master equations.

Two integrators live here:

* an embedded Dormand-Prince 5(4) pair with adaptive step control, used for
  everything by default, and
* a midpoint-exponential (Magnus-1) stepper for small linear generators whose
  only time dependence is a slowly rising intensity envelope.  Turn-on times
  can exceed the fastest relaxation rate by 7+ orders of magnitude, which an
  explicit pair cannot cover within any reasonable step budget.

Both step exactly onto the requested output times, so emitted states carry no
interpolation error.  A cubic Hermite interpolant is still provided for dense
queries between accepted steps.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm


class IntegrationFailure(RuntimeError):
    """Raised when a propagation cannot continue; carries the failing time."""

    def __init__(self, message, time):
        super().__init__(f"{message} (t = {time!r})")
        self.time = time


# Dormand-Prince 5(4) tableau.
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                   -92097 / 339200, 187 / 2100, 1 / 40])
_DP_E = _DP_B5 - _DP_B4

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0


def _error_norm(err, y_old, y_new, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y_old), np.abs(y_new))
    return np.sqrt(np.mean(np.abs(err / scale) ** 2))


def _initial_step(f, t0, y0, rtol, atol, direction):
    f0 = f(t0, y0)
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean(np.abs(y0 / scale) ** 2))
    d1 = np.sqrt(np.mean(np.abs(f0 / scale) ** 2))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    y1 = y0 + h0 * direction * f0
    f1 = f(t0 + h0 * direction, y1)
    d2 = np.sqrt(np.mean(np.abs((f1 - f0) / scale) ** 2)) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1)


def solve_rk45(f, y0, t_out, rtol=1e-8, atol=1e-12, post_step=None,
               emit=None, max_steps=20_000_000):
    """Integrate y' = f(t, y) over the strictly increasing grid ``t_out``.

    ``post_step(y) -> y`` is applied after every accepted step (used for
    re-Hermitization), ``emit(t, y)`` after landing on each output time.
    Returns the array of states at ``t_out``.
    """
    t_out = np.asarray(t_out, dtype=float)
    y = np.array(y0, dtype=complex)
    t = t_out[0]
    out = np.empty((len(t_out), y.size), dtype=complex)
    out[0] = y
    if emit is not None:
        emit(t, y)
    if len(t_out) == 1:
        return out

    h = _initial_step(f, t, y, rtol, atol, 1.0)
    k = np.empty((7, y.size), dtype=complex)
    k[0] = f(t, y)
    i_out = 1
    t_end = t_out[-1]
    nsteps = 0

    while t < t_end:
        nsteps += 1
        if nsteps > max_steps:
            raise IntegrationFailure("step budget exhausted", t)
        h_floor = 16 * np.finfo(float).eps * max(abs(t), 1.0)
        if h < h_floor:
            raise IntegrationFailure("step size underflow (generator too stiff "
                                     "for the explicit pair)", t)
        h = min(h, t_end - t)
        # land exactly on the next requested output time
        hit_output = t + h >= t_out[i_out] - 1e-14 * max(abs(t_out[i_out]), 1.0)
        if hit_output:
            h = t_out[i_out] - t

        for i in range(1, 7):
            yi = y + h * (k[:i].T @ _DP_A[i])
            k[i] = f(t + _DP_C[i] * h, yi)
        y_new = y + h * (k.T @ _DP_B5)
        err = h * (k.T @ _DP_E)
        norm = _error_norm(err, y, y_new, rtol, atol)

        if norm <= 1.0:
            t = t + h
            y = y_new
            if post_step is not None:
                y = post_step(y)
            k[0] = f(t, y)  # FSAL does not survive post_step; recompute
            if hit_output:
                out[i_out] = y
                if emit is not None:
                    emit(t, y)
                i_out += 1
                if i_out == len(t_out):
                    break
            factor = _MAX_FACTOR if norm == 0 else min(
                _MAX_FACTOR, _SAFETY * norm ** -0.2)
        else:
            factor = max(_MIN_FACTOR, _SAFETY * norm ** -0.2)
        h *= factor
    return out


def hermite_interpolate(t0, y0, f0, t1, y1, f1, t):
    """Cubic Hermite value between two accepted steps."""
    h = t1 - t0
    s = (t - t0) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s ** 2 * (3 - 2 * s)
    h11 = s ** 2 * (s - 1)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def solve_magnus_envelope(m_static, m_pump, envelope, y0, t_out, tol=1e-7,
                          post_step=None, max_refinements=16):
    """Propagate y' = (M0 + f(t) M1) y with an exponential stepper.

    Exact for piecewise-constant f.  Each output interval is swept with
    fixed exponential steps, the envelope frozen at each step's right
    endpoint, and refined by halving until two consecutive sweeps agree
    within tol.  Endpoint sampling matters: once steps exceed the
    relaxation time the state is projected onto the slow manifold of the
    final exponent, so sampling anywhere earlier leaves an O(h) lag while
    the endpoint value converges immediately.  Only sensible for small
    dense generators, since every step takes a matrix exponential.
    """
    m_static = np.asarray(m_static)
    m_pump = np.asarray(m_pump)
    t_out = np.asarray(t_out, dtype=float)
    y = np.array(y0, dtype=complex)
    out = np.empty((len(t_out), y.size), dtype=complex)
    out[0] = y

    def sweep(t0, t1, y_start, n_steps):
        h = (t1 - t0) / n_steps
        y = y_start
        for k in range(n_steps):
            f_end = envelope.value(t0 + (k + 1.0) * h)
            y = expm((m_static + f_end * m_pump) * h) @ y
            if post_step is not None:
                y = post_step(y)
        return y

    for i in range(1, len(t_out)):
        t0, t1 = t_out[i - 1], t_out[i]
        n_steps = 4
        coarse = sweep(t0, t1, y, n_steps)
        for _ in range(max_refinements):
            n_steps *= 2
            fine = sweep(t0, t1, y, n_steps)
            err = float(np.max(np.abs(fine - coarse)))
            coarse = fine
            if err <= tol * max(1.0, float(np.max(np.abs(fine)))):
                break
        else:
            raise IntegrationFailure("envelope stepper failed to converge", t0)
        y = coarse
        out[i] = y
    return out
