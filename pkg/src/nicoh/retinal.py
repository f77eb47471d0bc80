"""Two-state two-mode (2S2M) retinal photoisomerization under incoherent light.

Two diabatic electronic surfaces, a periodic torsional reaction coordinate
and a harmonic coupling stretch.  The torsional barrier terms carry opposite
signs on the two surfaces, so the ground surface is cis-stable (minimum at
phi = 0) while the excited surface descends toward the trans well at
phi = pi; the linear inter-surface coupling produces a conical intersection
near (x = 0, phi = pi/2) through which photoexcited population relaxes.

Master-equation structure: unitary part plus a radiative bath at the light
temperature and a phonon bath at the condensed-phase temperature.  Both
dissipators are built in the vibronic eigenbasis with per-transition rates
that satisfy detailed balance pairwise, and partial-secular cross terms
retained only inside near-degenerate clusters.  Cross amplitudes use the
geometric mean of the one-way rates feeding the pair (so a pair pumped from
a single level is born fully coherent) and the sech-corrected geometric
mean for the draining direction, which makes the Gibbs state of each bath's
temperature an exact stationary point of that bath's generator.

Units: energies in eV, hbar = 1 (time unit hbar/eV ~ 0.658 fs), k_B = 1
with temperatures converted from kelvin at the config boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .constants import thermal_energy_ev
from .core import DensityMatrix, HermitianOperator, Superoperator, Trajectory

__all__ = [
    "TwoStateTwoModeParams", "VibronicBasis", "RadiativeConfig",
    "PhononConfig", "DissipationConfig", "RefinementError",
    "LITERATURE_PARAMS", "product_space", "build_2s2m_hamiltonian",
    "adiabatic_surfaces", "vibronic_eigenbasis", "torsional_region_projector",
    "diabatic_projectors", "build_radiative_liouvillian",
    "build_phonon_liouvillian", "unitary_liouvillian", "coherence_ratio",
    "quantum_yield", "select_pair", "run_retinal_scenario",
]


class RefinementError(RuntimeError):
    """A grid-refinement loop failed to converge to the requested accuracy."""


@dataclass(frozen=True)
class TwoStateTwoModeParams:
    """Molecular parameters (eV).

    e0, e1: electronic energies; v0, v1: torsional barrier amplitudes with
    the printed alternating sign (ground +, excited -); omega: stretch
    frequency; kappa: excited-surface linear shift; lam: diabatic coupling;
    inv_inertia: torsional kinetic constant 1/(2 m_phi).
    """

    e0: float
    e1: float
    v0: float
    v1: float
    omega: float
    kappa: float
    lam: float
    inv_inertia: float

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError("stretch frequency must be > 0")
        if self.inv_inertia <= 0:
            raise ValueError("inverse inertia must be > 0")


# Hahn/Stock-style 2S2M values for rhodopsin, reproduced from the published
# model literature (externally sourced, not derived here); overridable.
LITERATURE_PARAMS = TwoStateTwoModeParams(
    e0=0.0, e1=2.48, v0=3.6, v1=1.09, omega=0.19, kappa=0.1, lam=0.19,
    inv_inertia=2.42e-4)


@dataclass(frozen=True)
class RadiativeConfig:
    """Radiative bath: blackbody occupation at ``temperature`` (kelvin),
    Condon dipole strength ``mu`` (the spontaneous rate for a transition at
    energy w is mu^2 |X_ab|^2 w^3), secular switch, and the frequency gap
    below which coherence generators are retained."""

    temperature: float
    mu: float
    secular: bool = False
    cluster_tol: float | None = None

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("radiative temperature must be > 0")
        if self.mu < 0:
            raise ValueError("dipole strength must be >= 0")
        if self.cluster_tol is not None and self.cluster_tol < 0:
            raise ValueError("cluster_tol must be >= 0")


@dataclass(frozen=True)
class PhononConfig:
    """Ohmic phonon bath eta * w * exp(-w/omega_c) at ``temperature`` (kelvin),
    coupled through the stretch and torsional position operators on each
    electronic surface."""

    temperature: float
    eta: float
    omega_c: float

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("phonon temperature must be > 0")
        if self.eta < 0 or self.omega_c <= 0:
            raise ValueError("spectral density parameters must be positive")


@dataclass(frozen=True)
class DissipationConfig:
    radiative: RadiativeConfig
    phonon: PhononConfig


@dataclass(frozen=True)
class ProductSpace:
    """Primitive basis: electronic (2) x plane waves (n_fourier) x HO (n_ho).

    Plane waves exp(i k phi) on the 2pi-periodic torsional domain
    [-pi/2, 3pi/2) with k = -n_fourier/2 .. n_fourier/2 - 1.
    """

    n_fourier: int
    n_ho: int
    k_values: np.ndarray

    @property
    def dim(self):
        return 2 * self.n_fourier * self.n_ho

    def identity_tor(self):
        return sp.identity(self.n_fourier, format="csr")

    def cos_phi(self):
        n = self.n_fourier
        return sp.diags([0.5 * np.ones(n - 1), 0.5 * np.ones(n - 1)],
                        [1, -1], format="csr")

    def torsional_kinetic(self, inv_inertia):
        return sp.diags(inv_inertia * self.k_values.astype(float) ** 2,
                        format="csr")

    def x_op(self):
        n = self.n_ho
        off = np.sqrt(np.arange(1, n) / 2.0)
        return sp.diags([off, off], [1, -1], format="csr")

    def ho_hamiltonian(self, omega):
        return sp.diags(omega * (np.arange(self.n_ho) + 0.5), format="csr")


def product_space(n_fourier, n_ho):
    if n_fourier < 4 or n_ho < 4:
        raise ValueError("basis sizes must be >= 4")
    if n_fourier % 2:
        raise ValueError("n_fourier must be even (symmetric wavenumber range)")
    k = np.arange(-n_fourier // 2, n_fourier // 2)
    return ProductSpace(n_fourier, n_ho, k)


def _el(i, j):
    m = np.zeros((2, 2))
    m[i, j] = 1.0
    return sp.csr_matrix(m)


def build_2s2m_hamiltonian(params, n_fourier=64, n_ho=24):
    """Sparse product-basis Hamiltonian; returns (H, ProductSpace).

    Diagonal surface terms: kinetic + E_n +- V_n(1-cos phi)/2 + stretch HO,
    plus kappa*x on the excited surface; off-diagonal coupling lam*x.
    """
    space = product_space(n_fourier, n_ho)
    i_tor = space.identity_tor()
    i_ho = sp.identity(n_ho, format="csr")
    t_tor = space.torsional_kinetic(params.inv_inertia)
    barrier = 0.5 * (i_tor - space.cos_phi())
    h_ho = space.ho_hamiltonian(params.omega)
    x = space.x_op()

    surf0 = (sp.kron(t_tor + params.e0 * i_tor + params.v0 * barrier, i_ho)
             + sp.kron(i_tor, h_ho))
    surf1 = (sp.kron(t_tor + params.e1 * i_tor - params.v1 * barrier, i_ho)
             + sp.kron(i_tor, h_ho) + sp.kron(i_tor, params.kappa * x))
    coupling = sp.kron(i_tor, params.lam * x)

    h = (sp.kron(_el(0, 0), surf0) + sp.kron(_el(1, 1), surf1)
         + sp.kron(_el(0, 1) + _el(1, 0), coupling)).tocsr()
    asym = abs(h - h.T.conj())
    if asym.nnz and asym.max() > 1e-12:
        raise RuntimeError("assembled Hamiltonian is not Hermitian")
    return h, space


def adiabatic_surfaces(params, phi, x):
    """Pointwise eigenvalues of the 2x2 potential matrix at (phi, x)."""
    v00 = params.e0 + 0.5 * params.v0 * (1 - np.cos(phi)) + 0.5 * params.omega * x ** 2
    v11 = (params.e1 - 0.5 * params.v1 * (1 - np.cos(phi))
           + 0.5 * params.omega * x ** 2 + params.kappa * x)
    c = params.lam * x
    mean = 0.5 * (v00 + v11)
    rad = np.sqrt(0.25 * (v00 - v11) ** 2 + c ** 2)
    return mean - rad, mean + rad


@dataclass(frozen=True)
class VibronicBasis:
    """Truncated eigenbasis with classification weights.

    labels: 'bright' (normalized squared dipole element to the ground
    eigenstate), 'cis'/'trans' (torsional-region weights), 'diab0'/'diab1'
    (electronic surface weights).
    """

    params: TwoStateTwoModeParams
    space: ProductSpace
    energies: np.ndarray
    coefficients: np.ndarray
    labels: dict = field(repr=False, default_factory=dict)

    @property
    def n_keep(self):
        return len(self.energies)

    def operator_in_eigenbasis(self, op):
        """Rotate a sparse product-basis operator into the kept eigenbasis."""
        w = self.coefficients
        return np.asarray(w.T.conj() @ (op @ w))

    def coupling_in_eigenbasis(self, op, noise_floor=1e-12):
        """Rotated real bath-coupling matrix, symmetrized and denoised.

        Symmetrizing keeps the up/down rate ratio of every transition an
        exact Boltzmann factor; elements below noise_floor of the largest
        are symmetry-forbidden rounding residue and are zeroed.
        """
        a = self.operator_in_eigenbasis(op).real
        a = 0.5 * (a + a.T)
        scale = np.max(np.abs(a))
        if scale > 0:
            a[np.abs(a) < noise_floor * scale] = 0.0
        return a

    def dipole_flip(self):
        """Condon electronic flip operator (|0><1| + |1><0|) x nuclear identity."""
        n_nuc = self.space.n_fourier * self.space.n_ho
        flip = sp.kron(_el(0, 1) + _el(1, 0), sp.identity(n_nuc, format="csr"))
        return self.coupling_in_eigenbasis(flip)


def _fix_signs(vecs):
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def vibronic_eigenbasis(h, space, params, n_keep, residual_tol=1e-8):
    """Lowest eigenpairs of the 2S2M Hamiltonian, with classification labels.

    Uses shift-invert Lanczos iteration (dense diagonalization when n_keep
    reaches the full dimension) and verifies residuals against
    residual_tol * ||H||.
    """
    dim = space.dim
    if n_keep > dim:
        raise ValueError(f"n_keep = {n_keep} exceeds basis dimension {dim}")
    h_norm = float(np.max(np.abs(h).sum(axis=1)))
    if n_keep >= dim - 1:
        evals, evecs = np.linalg.eigh(h.toarray())
        evals, evecs = evals[:n_keep], evecs[:, :n_keep]
    else:
        sigma = float(h.diagonal().min()) - 1.0
        v0 = np.ones(dim) / np.sqrt(dim)
        evals, evecs = spla.eigsh(h, k=n_keep, sigma=sigma, which="LM", v0=v0)
        order = np.argsort(evals)
        evals, evecs = evals[order], evecs[:, order]
    res = np.linalg.norm(h @ evecs - evecs * evals, axis=0)
    if res.max() > residual_tol * h_norm:
        raise RuntimeError(f"eigensolver residual {res.max():.3e} exceeds "
                           f"{residual_tol:.1e} * ||H|| = {residual_tol * h_norm:.3e}")
    evecs = _fix_signs(evecs)

    basis = VibronicBasis(params, space, evals, evecs)
    n_nuc = space.n_fourier * space.n_ho
    p1 = sp.kron(_el(1, 1), sp.identity(n_nuc, format="csr"))
    diab1 = np.einsum("is,is->s", evecs.conj(), p1 @ evecs).real
    chi = torsional_region_projector(space, "cis")
    r_cis = sp.kron(sp.identity(2, format="csr"),
                    sp.kron(sp.csr_matrix(chi), sp.identity(space.n_ho, format="csr")))
    cis = np.einsum("is,is->s", evecs.conj(), r_cis @ evecs).real
    dip = basis.dipole_flip()
    bright = np.abs(dip[:, 0]) ** 2
    if bright.max() > 0:
        bright = bright / bright.max()
    labels = {
        "bright": bright,
        "cis": np.clip(cis, 0.0, 1.0),
        "trans": np.clip(1.0 - cis, 0.0, 1.0),
        "diab1": np.clip(diab1, 0.0, 1.0),
        "diab0": np.clip(1.0 - diab1, 0.0, 1.0),
    }
    return VibronicBasis(params, space, evals, evecs, labels)


# ---------------------------------------------------------------------------
# torsional region projectors
# ---------------------------------------------------------------------------

def _region_fourier_coefficients(n_fourier, m_grid):
    """Midpoint-quadrature Fourier coefficients of the cis indicator.

    Grid cells are aligned so the region edges at +-pi/2 fall exactly on
    cell boundaries; returns c(dk) for dk in [-(n-1), n-1].
    """
    phi = -np.pi / 2 + (np.arange(m_grid) + 0.5) * (2 * np.pi / m_grid)
    inside = phi < np.pi / 2
    dk = np.arange(-(n_fourier - 1), n_fourier)
    phase = np.exp(-1j * np.outer(dk, phi[inside]))
    return dk, phase.sum(axis=1) / m_grid


def torsional_region_projector(space, region, tol=1e-6, m_start=None,
                               max_doublings=12):
    """Exactly idempotent plane-wave projector onto the cis or trans region.

    The indicator's matrix elements are assembled by midpoint quadrature on
    a uniform torsional grid (refined by doubling until converged within
    ``tol``); the resulting truncated-basis operator has a band of
    transitional eigenvalues, so it is snapped to a true projector by
    rounding its spectrum to {0, 1}.  The trans projector is the exact
    complement of the cis one.
    """
    if region not in ("cis", "trans"):
        raise ValueError(f"unknown region {region!r}")
    n = space.n_fourier
    m = m_start or 8 * n
    m += (-m) % 4  # region edges must sit on cell boundaries
    dk, coeff = _region_fourier_coefficients(n, m)
    for _ in range(max_doublings):
        m *= 2
        dk, refined = _region_fourier_coefficients(n, m)
        delta = np.max(np.abs(refined - coeff))
        coeff = refined
        if delta < tol:
            break
    else:
        raise RefinementError(
            f"torsional quadrature did not converge below {tol:.1e} "
            f"(last change {delta:.2e} at {m} grid points)")
    offset = n - 1
    chi = np.empty((n, n), dtype=complex)
    for i, k in enumerate(space.k_values):
        for j, kp in enumerate(space.k_values):
            chi[i, j] = coeff[offset + (k - kp)]
    chi = 0.5 * (chi + chi.conj().T)
    evals, evecs = np.linalg.eigh(chi)
    snapped = (evals > 0.5).astype(float)
    p_cis = (evecs * snapped) @ evecs.conj().T
    p_cis = 0.5 * (p_cis + p_cis.conj().T)
    if region == "cis":
        return p_cis
    return np.eye(n) - p_cis


def diabatic_projectors(basis, tol=1e-6):
    """(P_cis on surface 0, P_trans on surface 1) in the kept eigenbasis.

    Built from the idempotent torsional region projectors tensored with the
    electronic surface projectors, then rotated; the product
    P_cis0 @ P_trans1 vanishes identically because the electronic factors
    are orthogonal.
    """
    space = basis.space
    i_ho = sp.identity(space.n_ho, format="csr")
    chi_cis = sp.csr_matrix(torsional_region_projector(space, "cis", tol=tol))
    chi_trans = sp.csr_matrix(torsional_region_projector(space, "trans", tol=tol))
    p_cis0 = sp.kron(_el(0, 0), sp.kron(chi_cis, i_ho))
    p_trans1 = sp.kron(_el(1, 1), sp.kron(chi_trans, i_ho))
    full_idem = abs(p_cis0 @ p_cis0 - p_cis0).max()
    if full_idem > tol:
        raise RefinementError(f"projector idempotency error {full_idem:.2e}")
    return (HermitianOperator(basis.operator_in_eigenbasis(p_cis0)),
            HermitianOperator(basis.operator_in_eigenbasis(p_trans1)))


# ---------------------------------------------------------------------------
# dissipators
# ---------------------------------------------------------------------------

def _idx(a, b, n):
    return a + n * b


def _clustered_pairs(energies, cluster_tol):
    """Near-degenerate pairs kept by the partial-secular truncation.

    Candidates are all level pairs closer than cluster_tol; they are then
    greedily matched closest-gap-first so every level joins at most one
    retained coherence pair.  Overlapping pairs would keep two edges of an
    interference triangle while dropping the third, which breaks positivity
    of the truncated generator; disjoint matching avoids that while keeping
    the strongest near-degeneracies.
    """
    n = len(energies)
    cand = []
    for a in range(n):
        for b in range(a + 1, n):
            gap = abs(energies[a] - energies[b])
            if gap < cluster_tol:
                cand.append((gap, a, b))
    cand.sort()
    used, pairs = set(), []
    for _, a, b in cand:
        if a in used or b in used:
            continue
        used.update((a, b))
        pairs.append((a, b))
    return sorted(pairs)


class _CooBuilder:
    def __init__(self, n_levels):
        self.n = n_levels
        self.rows, self.cols, self.data = [], [], []

    def add(self, rows, cols, data):
        self.rows.append(np.asarray(rows, dtype=np.int64))
        self.cols.append(np.asarray(cols, dtype=np.int64))
        self.data.append(np.asarray(data, dtype=complex))

    def build(self):
        n2 = self.n * self.n
        if not self.rows:
            return sp.csr_matrix((n2, n2), dtype=complex)
        rows = np.concatenate(self.rows)
        cols = np.concatenate(self.cols)
        data = np.concatenate(self.data)
        return sp.coo_matrix((data, (rows, cols)), shape=(n2, n2)).tocsr()


def _one_way_rates(energies, a_mat, down_fn, up_fn):
    """k[a, b] = rate a -> b from |A_ab|^2 and the bath spectral functions."""
    omega = energies[:, None] - energies[None, :]
    k = np.zeros_like(omega)
    pos = omega > 0
    neg = omega < 0
    k[pos] = down_fn(omega[pos])
    k[neg] = up_fn(-omega[neg])
    k *= np.abs(a_mat) ** 2
    np.fill_diagonal(k, 0.0)
    return k


def _channel_terms(builder, energies, a_mat, k, s0, beta, pairs, cross):
    """Append one bath channel's generator entries.

    Secular part: Pauli population rates, coherence decay at half the total
    outflow, pure dephasing from the diagonal coupling spread.  Cross part
    (partial secular): for each clustered pair and third level, the source
    amplitude is the geometric mean of the one-way rates into the pair and
    the drain amplitude the sech-corrected geometric mean of the rates out,
    both signed by the coupling-element product.  With those choices the
    bath's own Gibbs state is annihilated exactly and a pair fed from a
    single level is born Cauchy-Schwarz-saturated, never oversaturated.
    """
    n = len(energies)
    gamma_out = k.sum(axis=1)
    aa = np.arange(n)
    diag_idx = _idx(aa, aa, n)

    src, dst = np.nonzero(k)
    if len(src):
        builder.add(_idx(dst, dst, n), _idx(src, src, n), k[src, dst])
    builder.add(diag_idx, diag_idx, -gamma_out)

    a_diag = np.diag(a_mat).real
    rows_ab = []
    decay = []
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            rows_ab.append(_idx(a, b, n))
            dephase = 0.5 * s0 * (a_diag[a] - a_diag[b]) ** 2
            decay.append(-0.5 * (gamma_out[a] + gamma_out[b]) - dephase)
    builder.add(rows_ab, rows_ab, decay)

    if not cross:
        return
    for a, b in pairs:
        sech = 1.0 / np.cosh(0.5 * beta * (energies[a] - energies[b]))
        c_all = np.arange(n)
        mask = (c_all != a) & (c_all != b)
        c_all = c_all[mask]
        amp_sign = (a_mat[a, c_all] * a_mat[b, c_all]).real
        live = amp_sign != 0.0
        c_all, amp_sign = c_all[live], amp_sign[live]
        if not len(c_all):
            continue
        unit = np.where(np.abs(a_mat[a, c_all] * a_mat[b, c_all]) > 0,
                        amp_sign / np.abs(a_mat[a, c_all] * a_mat[b, c_all]),
                        0.0)
        sigma_src = unit * np.sqrt(k[c_all, a] * k[c_all, b])
        sigma_snk = unit * np.sqrt(k[a, c_all] * k[b, c_all]) * sech

        ab, ba = _idx(a, b, n), _idx(b, a, n)
        cc = _idx(c_all, c_all, n)
        live_src = sigma_src != 0.0
        if live_src.any():
            builder.add(np.full(live_src.sum(), ab), cc[live_src],
                        sigma_src[live_src])
            builder.add(np.full(live_src.sum(), ba), cc[live_src],
                        sigma_src[live_src])
        total_snk = sigma_snk.sum()
        if total_snk != 0.0 or (sigma_snk != 0.0).any():
            half = 0.5 * total_snk
            for row in (ab, ba):
                builder.add([row, row], [_idx(a, a, n), _idx(b, b, n)],
                            [-half, -half])
            for pop in (_idx(a, a, n), _idx(b, b, n)):
                builder.add([pop, pop], [ab, ba], [-half, -half])
            live_snk = sigma_snk != 0.0
            builder.add(cc[live_snk], np.full(live_snk.sum(), ab),
                        sigma_snk[live_snk])
            builder.add(cc[live_snk], np.full(live_snk.sum(), ba),
                        sigma_snk[live_snk])


def unitary_liouvillian(basis):
    """-i [H, .] restricted to the kept eigenbasis (diagonal in vec space)."""
    n = basis.n_keep
    e = basis.energies
    omega = e[:, None] - e[None, :]
    diag = (-1j * omega).reshape(-1, order="F")
    return Superoperator(n, sp.diags(diag, format="csr"))


def radiative_gap(basis):
    """Dipole-weighted mean transition energy out of the ground eigenstate."""
    x = basis.dipole_flip()
    weights = np.abs(x[1:, 0]) ** 2
    if weights.sum() == 0:
        return np.inf
    return float((weights * (basis.energies[1:] - basis.energies[0])).sum()
                 / weights.sum())


def default_cluster_tol(basis, config):
    """Ten times the largest radiative rate (used when none is configured)."""
    beta = 1.0 / thermal_energy_ev(config.temperature)
    x = basis.dipole_flip()
    k = _one_way_rates(basis.energies, x,
                       *_radiative_spectral_functions(config.mu, beta))
    return 10.0 * float(k.max())


def _radiative_spectral_functions(mu, beta, dark=False):
    def nbar(w):
        if dark:
            return np.zeros_like(np.asarray(w, dtype=float))
        with np.errstate(over="ignore"):
            return 1.0 / np.expm1(np.minimum(beta * w, 700.0))

    def down(w):
        return mu ** 2 * w ** 3 * (nbar(w) + 1.0)

    def up(w):
        return mu ** 2 * w ** 3 * nbar(w)

    return down, up


def _phonon_spectral_functions(eta, omega_c, beta):
    def j(w):
        return eta * w * np.exp(-w / omega_c)

    def down(w):
        with np.errstate(over="ignore"):
            nbar = 1.0 / np.expm1(np.minimum(beta * w, 700.0))
        return j(w) * (nbar + 1.0)

    def up(w):
        with np.errstate(over="ignore"):
            nbar = 1.0 / np.expm1(np.minimum(beta * w, 700.0))
        return j(w) * nbar

    return down, up


def _radiative_build(basis, config, dark, cluster_pairs):
    beta = 1.0 / thermal_energy_ev(config.temperature)
    tol = config.cluster_tol
    if tol is None:
        tol = default_cluster_tol(basis, config)
    gap = radiative_gap(basis)
    if tol >= gap:
        raise ValueError(f"cluster_tol = {tol:.3g} reaches the radiative gap "
                         f"{gap:.3g}; ground-excited decoupling would break")
    x = basis.dipole_flip()
    down, up = _radiative_spectral_functions(config.mu, beta, dark=dark)
    k = _one_way_rates(basis.energies, x, down, up)
    pairs = cluster_pairs if cluster_pairs is not None else _clustered_pairs(
        basis.energies, tol)
    builder = _CooBuilder(basis.n_keep)
    _channel_terms(builder, basis.energies, x, k, s0=0.0, beta=beta,
                   pairs=pairs, cross=not config.secular)
    return Superoperator(basis.n_keep, builder.build())


def build_radiative_liouvillian(basis, config, cluster_pairs=None):
    """Incoherent-light dissipator in the eigenbasis.

    Per-transition rates: upward nbar*gamma, downward (nbar+1)*gamma with
    gamma = mu^2 |X_ab|^2 w^3.  Cross terms are kept for pairs within the
    clustering tolerance and dropped entirely when ``secular``.
    """
    return _radiative_build(basis, config, dark=False,
                            cluster_pairs=cluster_pairs)


def radiative_liouvillian_split(basis, config, cluster_pairs=None):
    """(spontaneous-only, intensity-proportional) halves of the dissipator.

    The turn-on envelope multiplies the second piece; at full intensity the
    sum is exactly ``build_radiative_liouvillian``.  The occupation factors
    are linearized in the intensity, exact at zero and full intensity.
    """
    full = build_radiative_liouvillian(basis, config, cluster_pairs=cluster_pairs)
    spont = _radiative_build(basis, config, dark=True,
                             cluster_pairs=cluster_pairs)
    return spont, full - spont


def build_phonon_liouvillian(basis, config, cluster_tol, cluster_pairs=None):
    """Phonon dissipator: Ohmic bath through surface-resolved x and cos(phi).

    Four coupling channels (each position operator on each surface), each
    with per-transition detailed balance and the same partial-secular
    clustering rule as the radiative dissipator, plus the zero-frequency
    dephasing contribution eta*T*(A_aa - A_bb)^2/2.
    """
    beta = 1.0 / thermal_energy_ev(config.temperature)
    space = basis.space
    i_ho = sp.identity(space.n_ho, format="csr")
    i_tor = space.identity_tor()
    ops = []
    for el in (0, 1):
        proj = _el(el, el)
        ops.append(sp.kron(proj, sp.kron(i_tor, space.x_op())))
        ops.append(sp.kron(proj, sp.kron(space.cos_phi(), i_ho)))
    pairs = cluster_pairs if cluster_pairs is not None else _clustered_pairs(
        basis.energies, cluster_tol)
    down, up = _phonon_spectral_functions(config.eta, config.omega_c, beta)
    s0 = config.eta * thermal_energy_ev(config.temperature)
    builder = _CooBuilder(basis.n_keep)
    for op in ops:
        a_mat = basis.coupling_in_eigenbasis(op)
        k = _one_way_rates(basis.energies, a_mat, down, up)
        _channel_terms(builder, basis.energies, a_mat, k, s0=s0, beta=beta,
                       pairs=pairs, cross=True)
    return Superoperator(basis.n_keep, builder.build())


# ---------------------------------------------------------------------------
# observables and scenario driver
# ---------------------------------------------------------------------------

def coherence_ratio(rho, i, j):
    """|rho_ij|^2 / (rho_ii rho_jj), zero when the population product is
    below 1e-14 (degenerate-input convention)."""
    if i == j:
        raise ValueError("coherence ratio needs two distinct states")
    mat = rho.elements if isinstance(rho, DensityMatrix) else np.asarray(rho)
    denom = mat[i, i].real * mat[j, j].real
    if denom < 1e-14:
        return 0.0
    return float(abs(mat[i, j]) ** 2 / denom)


def quantum_yield(rho, p_cis0, p_trans1):
    """Instantaneous photoproduct fraction <P_trans1>/(<P_cis0> + <P_trans1>).

    Zero when the combined projected population falls below 1e-14.  Tiny
    negative expectations from rounding are clamped to zero.
    """
    mat = rho.elements if isinstance(rho, DensityMatrix) else np.asarray(rho)
    cis = max(float(np.trace(p_cis0.elements @ mat).real), 0.0)
    trans = max(float(np.trace(p_trans1.elements @ mat).real), 0.0)
    denom = cis + trans
    if denom < 1e-14:
        return 0.0
    return trans / denom


def select_pair(basis, label, cluster_tol):
    """Resolve a tracked-pair label to concrete eigenstate indices.

    Candidates are excited-state pairs within the clustering tolerance
    (those are the only pairs the dissipators can source coherently).
    'bright' maximizes the product of dipole weights; 'product' the product
    of trans-character weights on the excited diabatic surface; and
    'intermediate' picks the dark candidate whose mean energy falls closest
    to halfway between the product and bright pairs.
    """
    if label not in ("bright", "intermediate", "product"):
        raise ValueError(f"unknown pair label {label!r}")
    e = basis.energies
    pairs = [(i, j) for (i, j) in _clustered_pairs(e, cluster_tol)
             if i != 0 and j != 0]
    if not pairs:
        raise ValueError("no clustered pairs available; widen cluster_tol")
    bright = basis.labels["bright"]
    trans = basis.labels["trans"] * basis.labels["diab1"]

    def best(score):
        scores = [score(i, j) for (i, j) in pairs]
        order = int(np.argmax(scores))
        if scores[order] <= 0:
            raise ValueError(f"no viable {label!r} pair among clustered pairs")
        return pairs[order]

    bright_pair = best(lambda i, j: bright[i] * bright[j])
    if label == "bright":
        return bright_pair
    product_pair = best(lambda i, j: trans[i] * trans[j])
    if label == "product":
        return product_pair
    bright_best = bright[bright_pair[0]] * bright[bright_pair[1]]
    mid = 0.5 * (e[list(bright_pair)].mean() + e[list(product_pair)].mean())
    dark = [(i, j) for (i, j) in pairs
            if bright[i] * bright[j] < 1e-2 * bright_best
            and (i, j) != product_pair]
    if not dark:
        raise ValueError("no dark intermediate pair among clustered pairs")
    dists = [abs(0.5 * (e[i] + e[j]) - mid) for (i, j) in dark]
    return dark[int(np.argmin(dists))]


def run_retinal_scenario(basis, dissipation, envelope, times, tracked_pairs,
                         rtol=1e-8, atol=1e-12, initial=None):
    """Propagate the full master equation and track yield and pair coherences.

    ``tracked_pairs`` maps labels to (i, j) index pairs.  The initial state
    defaults to the lowest eigenstate (the thermally relaxed cis reactant).
    Returns a Trajectory whose observables hold Y1 and, per pair, the two
    populations, the coherence magnitude, and the coherence ratio.
    """
    from .core import propagate_envelope

    n = basis.n_keep
    rad = dissipation.radiative
    tol = rad.cluster_tol
    if tol is None:
        tol = default_cluster_tol(basis, rad)
    pairs = _clustered_pairs(basis.energies, tol)
    l0 = unitary_liouvillian(basis)
    spont, stim = radiative_liouvillian_split(basis, rad, cluster_pairs=pairs)
    phon = build_phonon_liouvillian(basis, dissipation.phonon, tol,
                                    cluster_pairs=pairs)
    l_static = l0 + phon + spont
    if initial is None:
        vec = np.zeros(n)
        vec[0] = 1.0
        initial = DensityMatrix.pure(vec)
    traj = propagate_envelope(l_static, stim, envelope, initial, times,
                              rtol=rtol, atol=atol)
    p_cis0, p_trans1 = diabatic_projectors(basis)
    obs = {"Y1": np.array([quantum_yield(s, p_cis0, p_trans1)
                           for s in traj.states])}
    for name, (i, j) in tracked_pairs.items():
        stem = f"pair_{i}_{j}"
        obs[f"{stem}_rho_ii"] = np.array([s.elements[i, i].real for s in traj.states])
        obs[f"{stem}_rho_jj"] = np.array([s.elements[j, j].real for s in traj.states])
        obs[f"{stem}_abs_rho_ij"] = np.array([abs(s.elements[i, j]) for s in traj.states])
        obs[f"{stem}_C"] = np.array([coherence_ratio(s, i, j) for s in traj.states])
    obs["pair_labels"] = dict(tracked_pairs)
    return Trajectory(traj.times, traj.states, obs)
