"""Density-matrix algebra, propagation, steady states, and thermal states.

Everything downstream (V-systems, the transport dimer, calcium, retinal)
builds on the objects here.  Conventions: hbar = 1 and k_B = 1; energies and
rates share one unit ("rate units") unless a module states SI explicitly.
Superoperators act on column-stacked (Fortran-order) vectorized density
matrices, so the matrix element (a, b) of rho lives at flat index a + dim*b.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .ode import IntegrationFailure, solve_magnus_envelope, solve_rk45

__all__ = [
    "DensityMatrix", "HermitianOperator", "Superoperator", "TurnOnEnvelope",
    "Trajectory", "expectation", "gibbs_state", "propagate",
    "propagate_envelope", "steady_state", "check_generator",
    "IntegrationFailure", "NoSteadyStateError", "DegenerateSteadyStateWarning",
]

TRACE_TOL = 1e-10
PSD_TOL = 1e-9
CS_TOL = 1e-9
HERM_TOL = 1e-9


class NoSteadyStateError(RuntimeError):
    """The generator has no stationary state within tolerance."""


class DegenerateSteadyStateWarning(UserWarning):
    """The stationary subspace has dimension > 1; a physical tie-break was used."""


def _as_square_complex(elements, name):
    arr = np.asarray(elements, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {arr.shape}")
    return arr


def _hermitize(arr, name, tol):
    dev = np.max(np.abs(arr - arr.conj().T))
    if dev > tol:
        raise ValueError(f"{name} deviates from Hermiticity by {dev:.3e} (tol {tol:.1e})")
    out = 0.5 * (arr + arr.conj().T)
    out.flags.writeable = False
    return out


class HermitianOperator:
    """A Hermitian matrix (observable or Hamiltonian). Immutable."""

    __slots__ = ("dim", "elements")

    def __init__(self, elements):
        arr = _as_square_complex(elements, "HermitianOperator")
        self.elements = _hermitize(arr, "HermitianOperator", HERM_TOL)
        self.dim = arr.shape[0]

    def eigh(self):
        return np.linalg.eigh(self.elements)

    def __repr__(self):
        return f"HermitianOperator(dim={self.dim})"


class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite state. Immutable.

    Hermiticity is enforced exactly on construction (the stored matrix is
    (M + M^dag)/2).  Trace, positivity and Cauchy-Schwarz are checked within
    tolerances; ``tol_scale`` relaxes them uniformly (propagation uses 10x
    before declaring an integration failure).
    """

    __slots__ = ("dim", "elements")

    def __init__(self, elements, tol_scale=1.0):
        arr = _as_square_complex(elements, "DensityMatrix")
        arr = _hermitize(arr, "DensityMatrix", HERM_TOL * tol_scale)
        tr = np.trace(arr).real
        if abs(tr - 1.0) > TRACE_TOL * tol_scale:
            raise ValueError(f"trace = {tr!r} is not 1 within {TRACE_TOL * tol_scale:.1e}")
        pops = np.abs(np.diag(arr).real)
        cs = np.abs(arr) ** 2 - np.outer(pops, pops)
        np.fill_diagonal(cs, 0.0)
        if cs.max() > CS_TOL * tol_scale:
            raise ValueError(f"Cauchy-Schwarz violated by {cs.max():.3e}")
        evals = np.linalg.eigvalsh(arr)
        if evals.min() < -PSD_TOL * tol_scale:
            raise ValueError(f"negative eigenvalue {evals.min():.3e} below "
                             f"-{PSD_TOL * tol_scale:.1e}")
        self.elements = arr
        self.dim = arr.shape[0]

    @classmethod
    def pure(cls, ket):
        v = np.asarray(ket, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, dim):
        return cls(np.eye(dim) / dim)

    def population(self, i):
        return self.elements[i, i].real

    def coherence(self, i, j):
        return self.elements[i, j]

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


class Superoperator:
    """Linear map on dim x dim matrices, stored as a (dim^2, dim^2) matrix.

    The backing matrix may be dense or scipy-sparse.  Generators built in
    this package annihilate the trace and preserve Hermiticity; those are
    properties of the physics, checked by ``check_generator``, not enforced
    here (sums and scalar multiples of generators are still generators).
    """

    __slots__ = ("dim", "matrix")

    def __init__(self, dim, matrix):
        n = dim * dim
        if matrix.shape != (n, n):
            raise ValueError(f"matrix shape {matrix.shape} incompatible with dim {dim}")
        self.dim = dim
        self.matrix = matrix

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, dim):
        return cls(dim, np.zeros((dim * dim, dim * dim), dtype=complex))

    @classmethod
    def from_hamiltonian(cls, h):
        """-i[H, .] for a HermitianOperator or raw matrix."""
        hm = h.elements if isinstance(h, HermitianOperator) else np.asarray(h, dtype=complex)
        dim = hm.shape[0]
        eye = np.eye(dim)
        m = -1j * (np.kron(eye, hm) - np.kron(hm.T, eye))
        return cls(dim, m)

    @classmethod
    def lindblad(cls, c, rate=1.0):
        """rate * (c rho c^dag - 1/2 {c^dag c, rho})."""
        c = np.asarray(c, dtype=complex)
        dim = c.shape[0]
        eye = np.eye(dim)
        cdc = c.conj().T @ c
        m = np.kron(c.conj(), c) - 0.5 * (np.kron(eye, cdc) + np.kron(cdc.T, eye))
        return cls(dim, rate * m)

    @classmethod
    def from_apply(cls, dim, fn):
        """Materialize a matrix-valued linear map by applying it to a basis."""
        n = dim * dim
        m = np.zeros((n, n), dtype=complex)
        for col in range(n):
            e = np.zeros(n, dtype=complex)
            e[col] = 1.0
            m[:, col] = fn(e.reshape((dim, dim), order="F")).reshape(n, order="F")
        return cls(dim, m)

    # -- algebra ------------------------------------------------------

    def __add__(self, other):
        if self.dim != other.dim:
            raise ValueError("superoperator dimension mismatch")
        return Superoperator(self.dim, self.matrix + other.matrix)

    def __sub__(self, other):
        if self.dim != other.dim:
            raise ValueError("superoperator dimension mismatch")
        return Superoperator(self.dim, self.matrix - other.matrix)

    def __mul__(self, scalar):
        return Superoperator(self.dim, self.matrix * scalar)

    __rmul__ = __mul__

    def apply(self, rho):
        """Apply to a dim x dim matrix (or DensityMatrix); returns a matrix."""
        mat = rho.elements if isinstance(rho, (DensityMatrix, HermitianOperator)) else rho
        vec = np.asarray(mat, dtype=complex).reshape(-1, order="F")
        return (self.matrix @ vec).reshape((self.dim, self.dim), order="F")

    __call__ = apply

    def dense(self):
        return self.matrix.toarray() if sp.issparse(self.matrix) else self.matrix

    def __repr__(self):
        kind = "sparse" if sp.issparse(self.matrix) else "dense"
        return f"Superoperator(dim={self.dim}, {kind})"


@dataclass(frozen=True)
class TurnOnEnvelope:
    """Intensity turn-on profile multiplying pumping rates.

    ``sudden`` is 1 for t >= 0; ``exponential`` is 1 - exp(-t/tau_r).  Both
    vanish for t < 0 and are monotone nondecreasing with values in [0, 1].
    """

    kind: str = "sudden"
    tau_r: float = 0.0

    def __post_init__(self):
        if self.kind not in ("sudden", "exponential"):
            raise ValueError(f"unknown envelope kind {self.kind!r}")
        if self.tau_r < 0:
            raise ValueError("tau_r must be >= 0")

    def value(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "sudden" or self.tau_r == 0.0:
            out = np.where(t >= 0.0, 1.0, 0.0)
        else:
            out = np.where(t >= 0.0, -np.expm1(-np.maximum(t, 0.0) / self.tau_r), 0.0)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Trajectory:
    """Propagation output: states and named observable time series."""

    times: np.ndarray
    states: list
    observables: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if len(t) > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("times must be strictly increasing")
        if len(self.states) != len(t):
            raise ValueError("states and times length mismatch")
        object.__setattr__(self, "times", t)

    def final(self):
        return self.states[-1]


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def expectation(a, rho):
    """Tr(A rho) as a real scalar.

    The imaginary residue of the trace is asserted below tolerance and
    discarded; Hermitian inputs make it pure rounding noise.
    """
    if a.dim != rho.dim:
        raise ValueError(f"dimension mismatch: A is {a.dim}, rho is {rho.dim}")
    val = np.trace(a.elements @ rho.elements)
    if abs(val.imag) > 1e-12 * max(1.0, abs(val.real)):
        raise ValueError(f"expectation has imaginary residue {val.imag:.3e}")
    return val.real


def gibbs_state(h, temperature):
    """Thermal state exp(-H/T)/Z (k_B = 1): diagonal in the energy eigenbasis."""
    if temperature <= 0:
        raise ValueError("temperature must be > 0")
    evals, vecs = h.eigh()
    w = np.exp(-(evals - evals.min()) / temperature)
    w /= w.sum()
    return DensityMatrix((vecs * w) @ vecs.conj().T)


def _rhs_callable(rhs):
    """Normalize a generator argument into f(t, vec) -> vec."""
    if isinstance(rhs, Superoperator):
        m = rhs.matrix
        dim = rhs.dim
        return dim, (lambda t, y: m @ y)
    if callable(rhs):
        return None, rhs
    raise TypeError("rhs must be a Superoperator or a callable(t, rho) -> drho")


def _post_step_hermitize(dim):
    def fix(y):
        m = y.reshape((dim, dim), order="F")
        m = 0.5 * (m + m.conj().T)
        return m.reshape(-1, order="F")
    return fix


def _emit_states(dim, times, raw):
    states = []
    for i, t in enumerate(times):
        m = raw[i].reshape((dim, dim), order="F")
        m = 0.5 * (m + m.conj().T)
        try:
            states.append(DensityMatrix(m, tol_scale=10.0))
        except ValueError as exc:
            raise IntegrationFailure(f"state invariant violated: {exc}", t) from exc
    return states


def propagate(rhs, rho0, times, rtol=1e-8, atol=1e-12):
    """Adaptive RK5(4) integration of drho/dt = L(rho).

    Every accepted step is re-Hermitized; every emitted state is checked
    against the DensityMatrix invariants at 10x tolerance, and a violation
    raises IntegrationFailure with the offending time.
    """
    if rtol <= 0 or atol <= 0:
        raise ValueError("tolerances must be positive")
    times = np.asarray(times, dtype=float)
    if len(times) < 1 or (len(times) > 1 and not np.all(np.diff(times) > 0)):
        raise ValueError("times must be a nonempty ascending grid")
    dim = rho0.dim
    gen_dim, f_vec = _rhs_callable(rhs)
    if gen_dim is not None and gen_dim != dim:
        raise ValueError("generator and state dimensions differ")
    if gen_dim is None:
        mat_rhs = rhs
        def f_vec(t, y):  # noqa: F811 - wrap matrix-valued callable
            m = y.reshape((dim, dim), order="F")
            return np.asarray(mat_rhs(t, m), dtype=complex).reshape(-1, order="F")

    y0 = rho0.elements.reshape(-1, order="F")
    raw = solve_rk45(f_vec, y0, times, rtol=rtol, atol=atol,
                     post_step=_post_step_hermitize(dim))
    return Trajectory(times, _emit_states(dim, times, raw))


_MAGNUS_MAX_DIM = 8
_STIFFNESS_CUTOFF = 2e5


def propagate_envelope(l_static, l_pump, envelope, rho0, times,
                       rtol=1e-8, atol=1e-12):
    """Propagate drho/dt = (L_static + f(t) L_pump) rho.

    Dispatches to the midpoint-exponential stepper when the run length in
    units of the fastest relaxation time exceeds what the explicit pair can
    cover (slow turn-on runs), otherwise uses the RK5(4) path.
    """
    times = np.asarray(times, dtype=float)
    dim = rho0.dim
    m0, m1 = l_static.matrix, l_pump.matrix
    dense_ok = dim <= _MAGNUS_MAX_DIM and not (sp.issparse(m0) or sp.issparse(m1))
    if dense_ok:
        rate_scale = max(np.max(np.abs(np.diag(m0 + m1))), 1e-300)
        stiffness = (times[-1] - times[0]) * rate_scale
        if stiffness > _STIFFNESS_CUTOFF:
            y0 = rho0.elements.reshape(-1, order="F")
            raw = solve_magnus_envelope(m0, m1, envelope, y0, times,
                                        tol=min(rtol, 1e-9),
                                        post_step=_post_step_hermitize(dim))
            return Trajectory(times, _emit_states(dim, times, raw))
    combo = l_static + l_pump
    is_sparse = sp.issparse(combo.matrix)

    def f(t, y):
        fval = envelope.value(t)
        if is_sparse:
            return m0 @ y + fval * (m1 @ y)
        return (m0 + fval * m1) @ y

    y0 = rho0.elements.reshape(-1, order="F")
    raw = solve_rk45(f, y0, times, rtol=rtol, atol=atol,
                     post_step=_post_step_hermitize(dim))
    return Trajectory(times, _emit_states(dim, times, raw))


_DENSE_NULLSPACE_DIM = 12  # full SVD nullspace analysis up to this system dim


def _slowest_rate(matrix):
    evals = np.linalg.eigvals(matrix)
    rates = -evals.real
    rates = rates[rates > 1e-12]
    return rates.min() if len(rates) else 1.0


def steady_state(l, residual_tol=1e-10):
    """Stationary state of a generator: trace-normalized nullspace element.

    Solved directly with the trace-normalization condition replacing the
    first row of the vectorized generator.  A nullspace of dimension > 1
    (detected by SVD for small generators) triggers the physical tie-break:
    long-time propagation from the maximally mixed state, plus a
    DegenerateSteadyStateWarning.
    """
    dim = l.dim
    n = dim * dim
    trace_row = np.zeros(n)
    trace_row[::dim + 1] = 1.0

    if dim <= _DENSE_NULLSPACE_DIM:
        m = l.dense()
        svals = np.linalg.svd(m, compute_uv=False)
        scale = max(svals.max(), 1.0)
        null_dim = int(np.sum(svals < 1e-10 * scale))
        if null_dim == 0:
            raise NoSteadyStateError("generator has an empty nullspace within tolerance")
        if null_dim > 1:
            warnings.warn("stationary subspace is degenerate; returning the "
                          "state reached from the maximally mixed state",
                          DegenerateSteadyStateWarning)
            t_end = 50.0 / _slowest_rate(m)
            traj = propagate(l, DensityMatrix.maximally_mixed(dim),
                             np.array([0.0, t_end]), rtol=1e-10, atol=1e-13)
            rho = traj.final().elements
        else:
            a = m.copy()
            a[0, :] = trace_row
            b = np.zeros(n, dtype=complex)
            b[0] = 1.0
            rho = np.linalg.solve(a, b).reshape((dim, dim), order="F")
    else:
        m = l.matrix.tocsr() if sp.issparse(l.matrix) else sp.csr_matrix(l.matrix)
        a = m.tolil()
        a[0, :] = trace_row
        b = np.zeros(n, dtype=complex)
        b[0] = 1.0
        rho = spla.splu(a.tocsc()).solve(b).reshape((dim, dim), order="F")

    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    residual = np.linalg.norm(l.apply(rho))
    if residual > residual_tol:
        raise NoSteadyStateError(
            f"nullspace solve left residual {residual:.3e} > {residual_tol:.1e}; "
            "the generator may have no (or a degenerate) stationary state")
    return DensityMatrix(rho)


def check_generator(l, n_samples=100, tol=1e-12, rng=None):
    """Verify trace annihilation and Hermiticity preservation on random states.

    Returns (max trace residual, max Hermiticity deviation); raises if either
    exceeds ``tol`` scaled by the generator norm.
    """
    rng = np.random.default_rng(rng)
    dim = l.dim
    if sp.issparse(l.matrix):
        scale = max(np.max(np.abs(l.matrix.data)) if l.matrix.nnz else 1.0, 1.0)
    else:
        scale = max(np.max(np.abs(l.matrix)), 1.0)
    worst_tr, worst_herm = 0.0, 0.0
    for _ in range(n_samples):
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        h = a + a.conj().T
        h = h / np.trace(h).real if abs(np.trace(h).real) > 0.1 else h + np.eye(dim)
        h = h / np.trace(h).real
        out = l.apply(h)
        worst_tr = max(worst_tr, abs(np.trace(out)))
        worst_herm = max(worst_herm, np.max(np.abs(out - out.conj().T)))
    if worst_tr > tol * scale or worst_herm > tol * scale:
        raise AssertionError(
            f"generator violates invariants: trace residual {worst_tr:.2e}, "
            f"Hermiticity deviation {worst_herm:.2e} (scale {scale:.2e})")
    return worst_tr, worst_herm
