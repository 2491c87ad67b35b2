"""Dephasing dynamics: master-equation integration and quantum-jump unraveling.

The generator is
    drho/dt = -i (H_eff rho - rho H_eff^dag)
              + 2 gamma (sum_{i in D} P_i rho P_i + Q rho Q - rho),
with Q = I - sum_{i in D} P_i.  Integration uses fixed-step classical RK4; the
generator is linear, so one RK4 step is a fixed matrix on the vectorized state
and long horizons are covered by matrix powers of that exact step.

In the quantum-jump picture, jumps apply the same channel at rate 2 gamma
(poisson mode) or exactly every tau = 1/(2 gamma) (periodic mode), which
reproduces the repeated-measurement dynamics by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import DensityMatrix, eig_system, evolve, populations, propagator
from .measurement import MeasurementChannel, apply_channel
from .model import LatticeModel, effective_hamiltonian
from .transfer import EfficiencyResult

_COND_CUTOFF = 1e8


@dataclass(frozen=True)
class DephasingSpec:
    """Dephasing at rate gamma on the site set D of a lattice model."""

    model: LatticeModel
    gamma: float
    dephased_sites: frozenset

    def __post_init__(self):
        if self.gamma < 0 or not np.isfinite(self.gamma):
            raise ValueError("gamma must be finite and nonnegative")
        d = frozenset(int(i) for i in self.dephased_sites)
        if self.gamma > 0 and not d:
            raise ValueError("dephased site set must be nonempty when gamma > 0")
        if any(not 1 <= i <= self.model.n_sites for i in d):
            raise ValueError("dephased site out of range")
        object.__setattr__(self, "dephased_sites", d)


@dataclass(frozen=True)
class EnsembleResult:
    """Trajectory-ensemble averages with per-population standard errors."""

    n_traj: int
    seed: int
    times: np.ndarray
    mean_states: tuple  # DensityMatrix per requested time
    mean_populations: np.ndarray  # (n_times, n_sites)
    se_populations: np.ndarray  # (n_times, n_sites)
    mode: str


def _channel_masks(n, dephased_sites):
    measured = np.zeros(n, dtype=bool)
    for i in dephased_sites:
        measured[i - 1] = True
    keep = np.outer(~measured, ~measured)
    np.fill_diagonal(keep, True)
    return measured, keep


def _liouvillian(spec: DephasingSpec) -> np.ndarray:
    """The generator as a matrix on row-major vec(rho)."""
    h = effective_hamiltonian(spec.model).matrix
    n = spec.model.n_sites
    eye = np.eye(n)
    lv = -1j * (np.kron(h, eye) - np.kron(eye, h.conj()))
    if spec.gamma > 0:
        measured, _ = _channel_masks(n, spec.dephased_sites)
        q = np.diag((~measured).astype(float))
        chan = np.kron(q, q)
        for i in np.flatnonzero(measured):
            p = np.zeros((n, n))
            p[i, i] = 1.0
            chan += np.kron(p, p)
        lv = lv + 2.0 * spec.gamma * (chan - np.eye(n * n))
    return lv


def _rk4_step_matrix(lv: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 step for z' = L z, as the degree-4 Taylor polynomial."""
    a = h * lv
    m = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, 5):
        term = term @ a / k
        m = m + term
    return m


def default_step(spec: DephasingSpec) -> float:
    h = effective_hamiltonian(spec.model).matrix
    return 0.02 / max(float(np.abs(h).max()), 2.0 * spec.gamma, 1e-12)


def integrate_master(spec: DephasingSpec, rho0, times, dt: float | None = None):
    """Fixed-step RK4 integration of the dephasing master equation.

    Returns a list of DensityMatrix, one per requested time (times sorted,
    starting at or after 0).  The state is re-symmetrized at each output time.
    """
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be sorted")
    dt_max = default_step(spec)
    if dt is None:
        dt = dt_max
    elif dt > dt_max * (1 + 1e-12):
        raise ValueError(f"step-size violation: dt = {dt} exceeds bound {dt_max:.3g}")
    elif dt <= 0:
        raise ValueError("dt must be positive")
    rm = rho0.matrix if isinstance(rho0, DensityMatrix) else np.asarray(rho0, dtype=complex)
    n = rm.shape[0]
    if n != spec.model.n_sites:
        raise ValueError("state dimension does not match model")
    lv = _liouvillian(spec)
    z = rm.reshape(-1).astype(complex)
    out = []
    t_now = 0.0
    cache: dict = {}
    for t_target in times:
        span = t_target - t_now
        if span > 1e-15:
            n_steps = max(1, int(math.ceil(span / dt - 1e-12)))
            h_step = span / n_steps
            key = (round(h_step, 15), n_steps)
            if key not in cache:
                m = _rk4_step_matrix(lv, h_step)
                cache[key] = np.linalg.matrix_power(m, n_steps)
            z = cache[key] @ z
            t_now = t_target
        r = z.reshape(n, n)
        r = (r + r.conj().T) / 2
        z = r.reshape(-1)
        if not np.all(np.isfinite(r)):
            raise ValueError("non-finite state during integration")
        pops = np.real(np.diag(r))
        if np.any(pops < -1e-8) or np.any(pops > 1 + 1e-8):
            raise ValueError("populations left [0, 1] during integration")
        out.append(DensityMatrix(r))
    return out


def efficiency_dephasing(spec: DephasingSpec, dt: float | None = None) -> EfficiencyResult:
    """eta = 2 kappa int p_trap dt under dephasing on all sites.

    Integrates the RK4 step matrix (with population accumulators carried as
    extra state) out to 20 half-lives of the slowest decaying generator mode,
    and reports the equivalent measurement interval tau = 1/(2 gamma).
    """
    model = spec.model
    if not (np.any(model.trap_rates > 0) or model.decay_rate > 0):
        raise ValueError("efficiency undefined: no trapping or decay channel")
    if spec.gamma > 0 and spec.dephased_sites != frozenset(range(1, model.n_sites + 1)):
        raise ValueError("transport efficiency is defined for dephasing on all sites")
    n = model.n_sites
    lv = _liouvillian(spec)
    rates = -np.real(np.linalg.eigvals(lv))
    rates = rates[rates > 1e-9]
    if rates.size == 0:
        raise ValueError("internal-consistency error: no decaying generator mode")
    horizon = 20.0 * math.log(2.0) / float(rates.min())
    if dt is None:
        dt = default_step(spec)
    # augmented linear system: vec(rho) plus one integral accumulator per site
    m_dim = n * n + n
    lv_aug = np.zeros((m_dim, m_dim), dtype=complex)
    lv_aug[: n * n, : n * n] = lv
    for i in range(n):
        lv_aug[n * n + i, i * n + i] = 1.0
    n_steps = int(math.ceil(horizon / dt))
    step = _rk4_step_matrix(lv_aug, horizon / n_steps)
    z = np.zeros(m_dim, dtype=complex)
    rho0 = np.zeros((n, n), dtype=complex)
    rho0[model.initial_site - 1, model.initial_site - 1] = 1.0
    z[: n * n] = rho0.reshape(-1)
    z = np.linalg.matrix_power(step, n_steps) @ z
    integrals = np.real(z[n * n :])
    trapped = float(2.0 * model.trap_rates @ integrals)
    dissipated = float(2.0 * model.decay_rate * integrals.sum())
    residual = float(np.real(z[: n * n].reshape(n, n).trace()))
    tau = 1.0 / (2.0 * spec.gamma) if spec.gamma > 0 else None
    return EfficiencyResult(
        eta=trapped,
        trapped=trapped,
        dissipated=dissipated,
        residual=residual,
        tau=tau,
        method="master",
    )


def _pure_initial(rho0) -> np.ndarray:
    rm = rho0.matrix if isinstance(rho0, DensityMatrix) else np.asarray(rho0, dtype=complex)
    ev, vec = np.linalg.eigh(rm)
    if ev[-1] < np.trace(rm).real - 1e-10:
        raise ValueError("quantum-jump unraveling needs a pure initial state")
    return vec[:, -1] * math.sqrt(max(ev[-1], 0.0))


def quantum_jump_ensemble(
    spec: DephasingSpec, rho0, times, n_traj: int, seed: int, mode: str = "poisson"
) -> EnsembleResult:
    """Stochastic unraveling of the dephasing master equation.

    poisson mode draws exponential waiting times at rate 2 gamma; periodic mode
    applies the non-selective channel deterministically every tau = 1/(2 gamma)
    through the measurement module, so it reproduces repeated-measurement
    trajectories exactly.  Trajectories carry sub-normalized states under
    dissipation; per-trajectory RNG streams are derived from (seed, index).
    """
    if n_traj < 1:
        raise ValueError("n_traj must be at least 1")
    if mode not in ("poisson", "periodic"):
        raise ValueError(f"unknown mode {mode!r}")
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0) or np.any(times < 0):
        raise ValueError("times must be sorted and nonnegative")
    model = spec.model
    n = model.n_sites
    h = effective_hamiltonian(model).matrix

    if spec.gamma == 0:
        states = [evolve(propagator(h, t), rho0 if isinstance(rho0, DensityMatrix) else DensityMatrix(rho0)) for t in times]
        pops = np.array([populations(s) for s in states])
        return EnsembleResult(
            n_traj=n_traj,
            seed=seed,
            times=times,
            mean_states=tuple(states),
            mean_populations=pops,
            se_populations=np.zeros_like(pops),
            mode=mode,
        )

    if mode == "periodic":
        tau = 1.0 / (2.0 * spec.gamma)
        channel = MeasurementChannel(spec.dephased_sites, tau)
        u_tau = propagator(h, tau)
        rho = rho0 if isinstance(rho0, DensityMatrix) else DensityMatrix(rho0)
        states = []
        k_done = 0
        for t in times:
            k_target = int(np.floor(t / tau + 1e-12))
            while k_done < k_target:
                rho = apply_channel(channel, evolve(u_tau, rho))
                k_done += 1
            rem = t - k_done * tau
            states.append(evolve(propagator(h, rem), rho) if rem > 1e-15 else rho)
        pops = np.array([populations(s) for s in states])
        return EnsembleResult(
            n_traj=n_traj,
            seed=seed,
            times=times,
            mean_states=tuple(states),
            mean_populations=pops,
            se_populations=np.zeros_like(pops),
            mode=mode,
        )

    # poisson mode: per-trajectory jump process in the eigenbasis of H_eff
    w, v, vinv, cond = eig_system(h)
    if cond >= _COND_CUTOFF:
        raise ValueError("defective effective Hamiltonian; poisson unraveling unsupported here")
    psi0 = _pure_initial(rho0)
    measured, _ = _channel_masks(n, spec.dephased_sites)
    d_idx = np.flatnonzero(measured)
    rate = 2.0 * spec.gamma
    n_times = times.shape[0]
    sum_rho = np.zeros((n_times, n, n), dtype=complex)
    sum_p = np.zeros((n_times, n))
    sum_p2 = np.zeros((n_times, n))
    streams = np.random.SeedSequence(seed).spawn(n_traj)
    t_max = float(times[-1]) if n_times else 0.0
    for k in range(n_traj):
        rng = np.random.default_rng(streams[k])
        phi = vinv @ psi0  # state in eigenbasis
        t_now = 0.0
        ti = 0
        t_jump = rng.exponential(1.0 / rate)
        while ti < n_times:
            t_next = min(t_jump, times[ti])
            if t_next > t_now:
                phi = np.exp(-1j * w * (t_next - t_now)) * phi
                t_now = t_next
            if t_jump <= times[ti]:
                psi = v @ phi
                norm2 = float(np.real(psi.conj() @ psi))
                probs = np.abs(psi[d_idx]) ** 2
                u = rng.uniform(0.0, norm2)
                acc = 0.0
                hit = -1
                for j, pj in zip(d_idx, probs):
                    acc += pj
                    if u < acc:
                        hit = j
                        break
                if hit >= 0:
                    new = np.zeros(n, dtype=complex)
                    new[hit] = psi[hit]
                    scale = math.sqrt(norm2 / max(float(np.abs(psi[hit]) ** 2), 1e-300))
                else:
                    new = psi.copy()
                    new[d_idx] = 0.0
                    rem = float(np.real(new.conj() @ new))
                    scale = math.sqrt(norm2 / max(rem, 1e-300))
                psi = new * scale
                phi = vinv @ psi
                t_jump = t_now + rng.exponential(1.0 / rate)
            else:
                psi = v @ phi
                sum_rho[ti] += np.outer(psi, psi.conj())
                p = np.abs(psi) ** 2
                sum_p[ti] += p
                sum_p2[ti] += p * p
                ti += 1
    mean_rho = sum_rho / n_traj
    mean_p = sum_p / n_traj
    var = np.maximum(sum_p2 / n_traj - mean_p**2, 0.0)
    se = np.sqrt(var / max(n_traj - 1, 1))
    states = tuple(DensityMatrix((m + m.conj().T) / 2) for m in mean_rho)
    return EnsembleResult(
        n_traj=n_traj,
        seed=seed,
        times=times,
        mean_states=states,
        mean_populations=mean_p,
        se_populations=se,
        mode="poisson",
    )


def ensemble_to_csv(result: EnsembleResult, path) -> None:
    """Trajectory CSV schema plus se_p_i columns."""
    n = result.mean_populations.shape[1]
    header = (
        "t,"
        + ",".join(f"p_{i}" for i in range(1, n + 1))
        + ",trace,"
        + ",".join(f"se_p_{i}" for i in range(1, n + 1))
    )
    with open(path, "w", newline="") as f:
        f.write(header + "\n")
        for ti, t in enumerate(result.times):
            tr = float(result.mean_populations[ti].sum())
            cells = (
                [f"{t:.12g}"]
                + [f"{x:.12g}" for x in result.mean_populations[ti]]
                + [f"{tr:.12g}"]
                + [f"{x:.12g}" for x in result.se_populations[ti]]
            )
            f.write(",".join(cells) + "\n")
