"""Energy relaxation via quantum-jump trajectories and a dense oracle.

Each qubit decays through a lowering operator with rate ``1/T_1``.  The
trajectory unraveling evolves pure states under the non-Hermitian
``H_eff = H - (i/2) sum_s n_s / T_1^{(s)}`` (Arnoldi-Krylov segments,
no renormalization), using the squared norm as the survival probability:
when it crosses a uniform random threshold the jump time is bisected to
1e-3 ns, a site is drawn proportionally to its decay weight, the
lowering operator applied, and the clock rearmed.  Trajectory averages
converge to the Lindblad solution; a fixed-step RK4 integration of the
full master equation serves as the oracle at tiny sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .model import SparseOperator, occupation_of_site, total_occupation
from .propagator import KrylovConfig, PropagationError
from .seeding import rng_from

JUMP_TIME_RESOLUTION_NS = 1e-3

TRAJECTORY_CONFIG = KrylovConfig(tol=1e-10)


@dataclass(frozen=True)
class RelaxationSpec:
    """Per-site energy relaxation times in ns (device mean 32.1 us)."""

    t1_ns: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.t1_ns, dtype=float)
        if arr.ndim != 1 or np.any(arr <= 0):
            raise ValueError("t1_ns must be a 1-D array of positive times")
        arr.flags.writeable = False
        object.__setattr__(self, "t1_ns", arr)

    @classmethod
    def uniform(cls, n_sites: int, t1_ns: float = 32100.0) -> "RelaxationSpec":
        return cls(np.full(n_sites, t1_ns))


@dataclass(frozen=True)
class ObservableSeries:
    """Mean and standard error of observables on a time grid."""

    times_ns: np.ndarray
    means: dict[str, np.ndarray]
    stderrs: dict[str, np.ndarray]
    n_traj: int


def particle_number(state, local_dim: int = 2) -> float:
    """Number of sites holding exactly one excitation.

    Accepts a state vector or a density matrix.  On the qubit ladder this
    is the total excitation number; on the truncated-boson ladder sites
    leaked to double occupancy contribute zero, so its decay under
    unitary dynamics quantifies leakage.
    """
    state = np.asarray(state)
    probs = np.real(np.diagonal(state)) if state.ndim == 2 else np.abs(state) ** 2
    dim = probs.size
    n_sites = int(round(math.log(dim, local_dim)))
    if local_dim**n_sites != dim:
        raise ValueError(f"dimension {dim} is not a power of {local_dim}")
    if local_dim == 2:
        weights = total_occupation(n_sites, 2).astype(float)
    else:
        weights = np.zeros(dim)
        for s in range(n_sites):
            weights += occupation_of_site(n_sites, 3, s) == 1
    return float(np.dot(weights, probs))


def sz_site(state, site: int) -> float:
    """<sigma^z> at a site, for a qubit state vector or density matrix."""
    state = np.asarray(state)
    probs = np.real(np.diagonal(state)) if state.ndim == 2 else np.abs(state) ** 2
    n_sites = probs.size.bit_length() - 1
    signs = 1.0 - 2.0 * occupation_of_site(n_sites, 2, site).astype(float)
    return float(np.dot(signs, probs))


def _default_observables() -> dict[str, Callable]:
    return {"n": particle_number}


def _arnoldi_substep(matrix, psi: np.ndarray, dt: float, cfg: KrylovConfig):
    """exp(-i H_eff dt) psi for non-Hermitian H_eff; None if m_max too small."""
    norm0 = np.linalg.norm(psi)
    if norm0 == 0.0:
        return psi.copy()
    n = psi.size
    m_max = min(cfg.m_max, n)
    basis = np.empty((m_max, n), dtype=np.complex128)
    hess = np.zeros((m_max + 1, m_max), dtype=np.complex128)
    basis[0] = psi / norm0
    m = 0
    for j in range(m_max):
        w = matrix @ basis[j]
        for i in range(j + 1):
            hess[i, j] = np.vdot(basis[i], w)
            w -= hess[i, j] * basis[i]
        hess[j + 1, j] = np.linalg.norm(w)
        m = j + 1
        breakdown = abs(hess[j + 1, j]) <= 1e-14 * (abs(hess[0, 0]) + 1e-300)
        if not breakdown and j + 1 < m_max:
            basis[j + 1] = w / hess[j + 1, j]
        if m >= cfg.m_min or breakdown:
            small = scipy.linalg.expm(-1j * dt * hess[:m, :m])[:, 0]
            if breakdown or abs(hess[m, m - 1]) * abs(small[-1]) < cfg.tol:
                return norm0 * (basis[:m].T @ small)
        if breakdown:
            break
    return None


def nonhermitian_evolve(matrix, psi: np.ndarray, t_ns: float, cfg: KrylovConfig) -> np.ndarray:
    """Norm-decaying evolution under a non-Hermitian generator."""
    if t_ns == 0.0:
        return psi.copy()
    remaining = float(t_ns)
    step = min(cfg.step_ns, remaining)
    min_step = cfg.step_ns * 2.0**-24
    current = psi
    while remaining > 1e-12 * t_ns:
        dt = min(step, remaining)
        result = _arnoldi_substep(matrix, current, dt, cfg)
        if result is None:
            step = dt / 2.0
            if step < min_step:
                raise PropagationError("non-Hermitian Krylov failed to converge")
            continue
        current = result
        remaining -= dt
    return current


def _lowering_maps(n_sites: int):
    """For each site, source indices with the bit set and their targets."""
    k = np.arange(2**n_sites, dtype=np.int64)
    maps = []
    for s in range(n_sites):
        src = k[((k >> s) & 1) == 1]
        maps.append((src, src ^ (1 << s)))
    return maps


def evolve_trajectories(
    H: SparseOperator,
    relax: RelaxationSpec,
    psi0: np.ndarray,
    times_ns,
    n_traj: int,
    seed: int,
    observables: Mapping[str, Callable] | None = None,
    cfg: KrylovConfig = TRAJECTORY_CONFIG,
) -> ObservableSeries:
    """Quantum-jump average of observables over ``n_traj`` trajectories.

    Each trajectory draws from its own seed substream, so results are
    independent of execution order and reproducible for a fixed seed.
    Reported errors are the standard error of the trajectory mean.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    if H.local_dim != 2:
        raise ValueError("relaxation trajectories run on the qubit ladder")
    n_sites = H.n_sites
    if relax.t1_ns.size != n_sites:
        raise ValueError("relaxation spec does not cover the ladder")
    times = np.asarray(times_ns, dtype=float)
    if times.size == 0 or np.any(np.diff(times) < 0) or times[0] < 0:
        raise ValueError("times must be sorted and non-negative")
    obs = dict(observables) if observables is not None else _default_observables()

    rates = 1.0 / relax.t1_ns
    decay = np.zeros(H.dim)
    for s in range(n_sites):
        decay += rates[s] * occupation_of_site(n_sites, 2, s)
    h_eff = (H.matrix - 0.5j * sp.diags(decay.astype(np.complex128))).tocsr()
    lowering = _lowering_maps(n_sites)

    samples = {name: np.empty((n_traj, times.size)) for name in obs}
    for traj in range(n_traj):
        rng = rng_from(seed, "traj", traj)
        psi = np.asarray(psi0, dtype=np.complex128).copy()
        psi /= np.linalg.norm(psi)
        threshold = rng.random()
        t_now = 0.0
        for i, t_target in enumerate(times):
            while t_now < t_target - 1e-12:
                dt = min(cfg.step_ns, t_target - t_now)
                trial = nonhermitian_evolve(h_eff, psi, dt, cfg)
                nrm2 = float(np.real(np.vdot(trial, trial)))
                if nrm2 >= threshold:
                    psi = trial
                    t_now += dt
                    continue
                # Jump inside (t_now, t_now + dt]: bisect the crossing.
                lo, hi = 0.0, dt
                while hi - lo > JUMP_TIME_RESOLUTION_NS:
                    mid = 0.5 * (lo + hi)
                    mid_state = nonhermitian_evolve(h_eff, psi, mid, cfg)
                    if float(np.real(np.vdot(mid_state, mid_state))) >= threshold:
                        lo = mid
                    else:
                        hi = mid
                t_jump = 0.5 * (lo + hi)
                psi = nonhermitian_evolve(h_eff, psi, t_jump, cfg)
                if np.linalg.norm(psi) == 0.0:
                    raise PropagationError("trajectory norm collapsed to zero")
                weights = np.empty(n_sites)
                p2 = np.abs(psi) ** 2
                for s in range(n_sites):
                    weights[s] = rates[s] * float(
                        np.dot(occupation_of_site(n_sites, 2, s), p2)
                    )
                total = weights.sum()
                if total <= 0.0:
                    raise PropagationError("jump triggered with no decayable weight")
                site = int(rng.choice(n_sites, p=weights / total))
                src, dst = lowering[site]
                new_psi = np.zeros_like(psi)
                new_psi[dst] = psi[src]
                psi = new_psi / np.linalg.norm(new_psi)
                threshold = rng.random()
                t_now += t_jump
            normed = psi / np.linalg.norm(psi)
            for name, fn in obs.items():
                samples[name][traj, i] = fn(normed)

    means = {name: vals.mean(axis=0) for name, vals in samples.items()}
    stderrs = {
        name: (
            vals.std(axis=0, ddof=1) / math.sqrt(n_traj)
            if n_traj > 1
            else np.zeros(times.size)
        )
        for name, vals in samples.items()
    }
    return ObservableSeries(times_ns=times, means=means, stderrs=stderrs, n_traj=n_traj)


def dense_lindblad(
    H: SparseOperator,
    relax: RelaxationSpec,
    rho0: np.ndarray,
    times_ns,
    dt_ns: float = 0.05,
    observables: Mapping[str, Callable] | None = None,
) -> ObservableSeries:
    """Fixed-step RK4 integration of the full master equation (oracle).

    Limited to dimension 64 (the density matrix is integrated in full).
    Raises if the trace drifts beyond 1e-8 or an eigenvalue dips below
    -1e-8, both symptoms of too large a step; the default step keeps the
    fourth-order error below those tolerances on the 100 ns-scale windows
    this oracle is used for.
    """
    if H.dim > 64:
        raise ValueError(f"dense_lindblad limited to dim <= 64, got {H.dim}")
    if H.local_dim != 2:
        raise ValueError("relaxation model runs on the qubit ladder")
    n_sites = H.n_sites
    if relax.t1_ns.size != n_sites:
        raise ValueError("relaxation spec does not cover the ladder")
    times = np.asarray(times_ns, dtype=float)
    if times.size == 0 or np.any(np.diff(times) < 0) or times[0] < 0:
        raise ValueError("times must be sorted and non-negative")
    obs = dict(observables) if observables is not None else _default_observables()

    rho = np.asarray(rho0, dtype=np.complex128)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    if rho.shape != (H.dim, H.dim):
        raise ValueError("rho0 shape does not match the operator")
    rho = rho / np.trace(rho).real

    h_dense = H.to_dense()
    ls = []
    k = np.arange(H.dim, dtype=np.int64)
    for s in range(n_sites):
        mat = np.zeros((H.dim, H.dim), dtype=np.complex128)
        src = k[((k >> s) & 1) == 1]
        mat[src ^ (1 << s), src] = 1.0 / math.sqrt(relax.t1_ns[s])
        ls.append(mat)
    ldl = sum(m.conj().T @ m for m in ls)

    def rhs(r):
        out = -1j * (h_dense @ r - r @ h_dense)
        out -= 0.5 * (ldl @ r + r @ ldl)
        for m in ls:
            out += m @ r @ m.conj().T
        return out

    means = {name: np.empty(times.size) for name in obs}
    t_now = 0.0
    for i, t_target in enumerate(times):
        span = t_target - t_now
        if span > 0:
            n_steps = max(1, int(math.ceil(span / dt_ns)))
            h = span / n_steps
            for _ in range(n_steps):
                k1 = rhs(rho)
                k2 = rhs(rho + 0.5 * h * k1)
                k3 = rhs(rho + 0.5 * h * k2)
                k4 = rhs(rho + h * k3)
                rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            t_now = t_target
        trace = np.trace(rho).real
        if abs(trace - 1.0) > 1e-8:
            raise PropagationError(f"trace drifted to {trace}; reduce dt_ns")
        min_eig = float(np.linalg.eigvalsh(rho).min())
        if min_eig < -1e-8:
            raise PropagationError(f"density matrix lost positivity ({min_eig}); reduce dt_ns")
        for name, fn in obs.items():
            means[name][i] = fn(rho)
    zeros = {name: np.zeros(times.size) for name in obs}
    return ObservableSeries(times_ns=times, means=means, stderrs=zeros, n_traj=0)
