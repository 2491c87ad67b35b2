"""Time evolution under the effective Hamiltonian and population observables."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import OutOfRegimeError
from .model import EffectiveHamiltonian, LatticeModel, effective_hamiltonian

_COND_CUTOFF = 1e8
_HERM_TOL = 1e-12
_EIG_FLOOR = -1e-10


@dataclass(frozen=True)
class DensityMatrix:
    """Complex Hermitian PSD matrix with trace <= 1 (sub-normalized under loss)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("density matrix has non-finite entries")
        if np.max(np.abs(m - m.conj().T)) > _HERM_TOL:
            raise ValueError("density matrix is not Hermitian")
        ev = np.linalg.eigvalsh(m)
        if ev[0] < _EIG_FLOOR:
            raise ValueError(f"density matrix not positive semidefinite (min eig {ev[0]:.3e})")
        tr = float(np.trace(m).real)
        if not -1e-10 <= tr <= 1 + 1e-10:
            raise ValueError(f"trace {tr} outside [0, 1]")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n_sites(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


@dataclass(frozen=True)
class Propagator:
    """U(t) = exp(-i H_eff t), with the construction method recorded."""

    duration: float
    matrix: np.ndarray
    method: str  # "eigendecomposition" | "series"

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def pure_site_state(n_sites: int, site: int) -> DensityMatrix:
    """|site><site| as a density matrix (1-based site index)."""
    if not 1 <= site <= n_sites:
        raise ValueError(f"site {site} out of range 1..{n_sites}")
    m = np.zeros((n_sites, n_sites), dtype=complex)
    m[site - 1, site - 1] = 1.0
    return DensityMatrix(m)


def _h_matrix(h_eff) -> np.ndarray:
    if isinstance(h_eff, EffectiveHamiltonian):
        return h_eff.matrix
    return np.asarray(h_eff, dtype=complex)


def eig_system(h_eff):
    """Eigendecomposition (w, V, Vinv, cond) of a possibly non-normal matrix."""
    h = _h_matrix(h_eff)
    w, v = np.linalg.eig(h)
    cond = np.linalg.cond(v)
    vinv = np.linalg.inv(v) if np.isfinite(cond) and cond < 1e14 else None
    return w, v, vinv, cond


def propagator(h_eff, t: float, method: str | None = None) -> Propagator:
    """exp(-i H_eff t) via eigendecomposition, or scaling-and-squaring when the
    eigenvector matrix is ill-conditioned (cond >= 1e8)."""
    h = _h_matrix(h_eff)
    if not np.all(np.isfinite(h)):
        raise ValueError("Hamiltonian has non-finite entries")
    if t < 0:
        raise ValueError("t must be nonnegative")
    eig = None
    if method is None:
        eig = eig_system(h)
        method = "eigendecomposition" if eig[3] < _COND_CUTOFF else "series"
    if method == "eigendecomposition":
        if eig is None:
            eig = eig_system(h)
        w, v, vinv, _ = eig
        u = (v * np.exp(-1j * w * t)) @ vinv
    elif method == "series":
        u = scipy.linalg.expm(-1j * h * t)
    else:
        raise ValueError(f"unknown method {method!r}")
    return Propagator(duration=float(t), matrix=u, method=method)


def evolve(u, rho) -> DensityMatrix:
    """U rho U-dagger, re-symmetrized to suppress roundoff drift."""
    um = u.matrix if isinstance(u, Propagator) else np.asarray(u, dtype=complex)
    rm = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if um.shape != rm.shape:
        raise ValueError(f"dimension mismatch: U {um.shape} vs rho {rm.shape}")
    x = um @ rm @ um.conj().T
    return DensityMatrix((x + x.conj().T) / 2)


def populations(rho) -> np.ndarray:
    """Site populations p_i = Re(rho_ii)."""
    rm = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return np.real(np.diag(rm)).copy()


def _unitary_population_series(model: LatticeModel, site: int, times: np.ndarray) -> np.ndarray:
    """p_site(t) on a time grid under the Hermitian part (kappa = Gamma = 0)."""
    herm = effective_hamiltonian(model).hermitian_part
    w, v = np.linalg.eigh(herm)
    a = v.conj().T[:, model.initial_site - 1]  # overlaps <a|init>
    b = v[site - 1, :]  # <site|a>
    # amplitude(t) = sum_a b_a exp(-i w_a t) a_a
    phases = np.exp(-1j * np.outer(times, w))
    amp = phases @ (b * a)
    return np.abs(amp) ** 2


def time_averaged_population(model: LatticeModel, site: int, T: float, dt: float) -> float:
    """(1/T) int_0^T p_site(t) dt under unitary dynamics, trapezoidal rule."""
    if T <= 0 or dt <= 0:
        raise ValueError("T and dt must be positive")
    if not 1 <= site <= model.n_sites:
        raise ValueError(f"site {site} out of range")
    n_steps = max(2, int(round(T / dt)))
    times = np.linspace(0.0, T, n_steps + 1)
    p = _unitary_population_series(model, site, times)
    return float(np.trapezoid(p, times) / T)


def perturbative_average(model: LatticeModel) -> float:
    """Leading-order localized average population at the terminal site,
    (L+1)(v/eps)^(2L) with eps = eps_1 - eps_n."""
    n = model.n_sites
    c = model.couplings
    off = np.abs(c) > 0
    chain_mask = np.zeros_like(off)
    idx = np.arange(n - 1)
    chain_mask[idx, idx + 1] = True
    chain_mask[idx + 1, idx] = True
    if np.any(off & ~chain_mask):
        raise ValueError("perturbative average requires chain topology")
    eps = float(model.site_energies[0] - model.site_energies[-1])
    if eps == 0.0:
        raise OutOfRegimeError("eps = eps_1 - eps_n vanishes; formula invalid")
    v = float(c[0, 1])
    L = n - 1
    return (L + 1) * (v / eps) ** (2 * L)
