"""Non-selective projective measurement channels and repeated-measurement dynamics.

Covers the exact channel (full or partial site sets), the per-interval
transition matrix T_ij = |<i|U(tau)|j>|^2, the small-tau recursion and its
binomial closed form, and Zeno/anti-Zeno crossover detection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .dynamics import (
    DensityMatrix,
    Propagator,
    evolve,
    populations,
    propagator,
    pure_site_state,
    time_averaged_population,
)
from .errors import OutOfRegimeError
from .model import LatticeModel, effective_hamiltonian


@dataclass(frozen=True)
class MeasurementChannel:
    """Repeated non-selective measurement of a site set with interval tau."""

    measured_sites: frozenset
    interval: float

    def __post_init__(self):
        s = frozenset(int(i) for i in self.measured_sites)
        if not s:
            raise ValueError("measured site set must be nonempty")
        if any(i < 1 for i in s):
            raise ValueError("site indices are 1-based")
        if not (np.isfinite(self.interval) and self.interval > 0):
            raise ValueError("measurement interval must be positive and finite")
        object.__setattr__(self, "measured_sites", s)


@dataclass(frozen=True)
class TransitionMatrix:
    """Per-interval hopping probabilities T_ij = |<i|U(tau)|j>|^2."""

    matrix: np.ndarray
    interval: float

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if np.any(m < -1e-12) or np.any(m > 1 + 1e-10):
            raise ValueError("transition probabilities outside [0, 1]")
        if np.any(m.sum(axis=0) > 1 + 1e-10):
            raise ValueError("column sums exceed 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class MeasuredTrajectory:
    """Populations (and optionally full states) sampled at t_k = k tau."""

    times: np.ndarray
    populations: np.ndarray  # (n_steps + 1, n_sites)
    states: tuple | None = None  # DensityMatrix per step when coherences survive

    @property
    def traces(self) -> np.ndarray:
        if self.states is not None:
            return np.array([s.trace for s in self.states])
        return self.populations.sum(axis=1)


def apply_channel(channel: MeasurementChannel, rho) -> DensityMatrix:
    """rho -> sum_{i in S} P_i rho P_i + Q rho Q (trace preserved exactly).

    Coherences among unmeasured sites survive; everything touching a measured
    site collapses to its diagonal.
    """
    rm = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    n = rm.shape[0]
    measured = np.zeros(n, dtype=bool)
    for i in channel.measured_sites:
        if i > n:
            raise ValueError(f"measured site {i} out of range for {n} sites")
        measured[i - 1] = True
    keep = np.outer(~measured, ~measured)
    np.fill_diagonal(keep, True)
    return DensityMatrix(np.where(keep, rm, 0.0))


def transition_matrix(h_eff, tau: float) -> TransitionMatrix:
    """Site-to-site transfer probabilities over one measurement interval."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    u = propagator(h_eff, tau)
    return TransitionMatrix(np.abs(u.matrix) ** 2, tau)


def repeated_measurement_trajectory(
    model: LatticeModel, channel: MeasurementChannel, n_steps: int
) -> MeasuredTrajectory:
    """Alternate free evolution and the measurement channel for n_steps intervals.

    When every site is measured the state stays diagonal, so the trajectory is
    the exact matrix iteration p(t_k) = T^k p(0); otherwise the full density
    matrix is propagated.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative")
    n = model.n_sites
    h = effective_hamiltonian(model)
    tau = channel.interval
    times = np.arange(n_steps + 1) * tau
    full_set = channel.measured_sites == frozenset(range(1, n + 1))
    if full_set:
        t = transition_matrix(h, tau).matrix
        p = np.zeros(n)
        p[model.initial_site - 1] = 1.0
        traj = np.empty((n_steps + 1, n))
        traj[0] = p
        for k in range(1, n_steps + 1):
            p = t @ p
            traj[k] = p
        return MeasuredTrajectory(times=times, populations=traj)
    u = propagator(h, tau)
    rho = pure_site_state(n, model.initial_site)
    states = [rho]
    traj = np.empty((n_steps + 1, n))
    traj[0] = populations(rho)
    for k in range(1, n_steps + 1):
        rho = apply_channel(channel, evolve(u, rho))
        states.append(rho)
        traj[k] = populations(rho)
    return MeasuredTrajectory(times=times, populations=traj, states=tuple(states))


def recursive_step(p, tau: float, v: float) -> np.ndarray:
    """One step of the small-tau hopping recursion on a chain:
    p_i <- (1 - 2 tau^2 v^2) p_i + tau^2 v^2 (p_{i-1} + p_{i+1}),
    with boundary sites losing only tau^2 v^2 per existing neighbor so the
    step conserves probability."""
    p = np.asarray(p, dtype=float)
    w = (tau * v) ** 2
    if tau * v >= 1 / math.sqrt(2):
        raise OutOfRegimeError(f"tau*v = {tau * v:.3g} >= 1/sqrt(2); recursion weights go negative")
    n = p.shape[0]
    deg = np.full(n, 2.0)
    deg[0] = deg[-1] = 1.0
    left = np.concatenate(([0.0], p[:-1]))
    right = np.concatenate((p[1:], [0.0]))
    return (1 - deg * w) * p + w * (left + right)


def binomial_population(L: int, n: int, tau: float, v: float) -> float:
    """Closed-form terminal-site population after n measurement intervals on a
    chain of L hops: C(n, n-L) (1 - 2 tau^2 v^2)^(n-L) (tau^2 v^2)^L."""
    if n < L:
        raise OutOfRegimeError(f"n = {n} < L = {L}")
    w = (tau * v) ** 2
    if n * w >= 1:
        raise OutOfRegimeError(f"n tau^2 v^2 = {n * w:.3g} >= 1; outside validity regime")
    if n > 50:
        log_c = gammaln(n + 1) - gammaln(L + 1) - gammaln(n - L + 1)
        return float(np.exp(log_c + (n - L) * np.log1p(-2 * w) + L * np.log(w)))
    return float(math.comb(n, n - L) * (1 - 2 * w) ** (n - L) * w**L)


def crossover_time(
    model: LatticeModel,
    tau: float,
    horizon: float,
    average_T: float | None = None,
    average_dt: float | None = None,
) -> dict:
    """First t_n = n tau at which the measured terminal population exceeds the
    no-measurement time average (Zeno -> anti-Zeno crossover).

    Returns a dict with t_c, n_c, p_bar (numerical time average) and, for
    chains, the leading-order p_bar alongside.  t_c is None when no crossover
    occurs within the horizon.
    """
    if horizon < tau:
        raise ValueError("horizon must be at least one interval")
    if np.any(model.trap_rates > 0) or model.decay_rate > 0:
        raise ValueError("crossover analysis requires kappa = Gamma = 0")
    n = model.n_sites
    e = model.site_energies
    gaps = np.abs(e[:, None] - e[None, :])
    max_gap = float(gaps.max())
    h_scale = max(max_gap, float(np.abs(model.couplings).max()), 1.0)
    if average_T is None:
        # well past 1/eps for any disordered model; generous for near-resonant ones
        average_T = 200.0 if max_gap == 0 else max(100.0, 2000.0 / max_gap)
    if average_dt is None:
        average_dt = 0.05 / h_scale
    p_bar = time_averaged_population(model, n, average_T, average_dt)
    try:
        from .dynamics import perturbative_average

        p_bar_leading = perturbative_average(model)
    except ValueError:
        p_bar_leading = None
    t = transition_matrix(effective_hamiltonian(model), tau).matrix
    p = np.zeros(n)
    p[model.initial_site - 1] = 1.0
    n_max = int(np.floor(horizon / tau + 1e-12))
    for k in range(1, n_max + 1):
        p = t @ p
        if p[-1] > p_bar:
            return {"t_c": k * tau, "n_c": k, "p_bar": p_bar, "p_bar_leading": p_bar_leading}
    return {"t_c": None, "n_c": None, "p_bar": p_bar, "p_bar_leading": p_bar_leading}


def trajectory_to_csv(traj: MeasuredTrajectory, path) -> None:
    """Write a trajectory as CSV with header t,p_1,...,p_n,trace."""
    n = traj.populations.shape[1]
    header = "t," + ",".join(f"p_{i}" for i in range(1, n + 1)) + ",trace"
    traces = traj.traces
    with open(path, "w", newline="") as f:
        f.write(header + "\n")
        for t, row, tr in zip(traj.times, traj.populations, traces):
            cells = [f"{t:.12g}"] + [f"{x:.12g}" for x in row] + [f"{tr:.12g}"]
            f.write(",".join(cells) + "\n")
