"""Krylov-subspace time evolution of state vectors.

``evolve`` advances a state under a sparse Hermitian Hamiltonian with a
Lanczos (three-term) recurrence: within each substep the subspace is
grown from ``m_min`` until the standard residual estimate
``beta_{m+1} * |[exp(-i H_m dt)]_{m,1}|`` drops below the tolerance, and
the substep is halved if ``m_max`` is not enough.  One full
reorthogonalization pass per Lanczos vector keeps the basis numerically
orthogonal.

The inner loop is a CSR matrix-vector product evaluated row by row in a
fixed order, so results are bit-reproducible regardless of how many
worker processes run around it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .model import SparseOperator, Site, site_index

NORM_TOL = 1e-10


class PropagationError(RuntimeError):
    """Krylov iteration failed to converge at the minimum substep."""


@dataclass(frozen=True)
class KrylovConfig:
    """Adaptive Lanczos parameters.

    The subspace dimension ranges over ``[m_min, m_max]``; ``step_ns`` is
    the initial substep; ``tol`` bounds the residual estimate per substep.
    """

    m_min: int = 6
    m_max: int = 30
    step_ns: float = 5.0
    tol: float = 1e-12

    def __post_init__(self):
        if not (2 <= self.m_min <= self.m_max <= 64):
            raise ValueError("need 2 <= m_min <= m_max <= 64")
        if self.tol <= 0 or self.step_ns <= 0:
            raise ValueError("tol and step_ns must be positive")


DEFAULT_CONFIG = KrylovConfig()


def _lanczos_substep(matrix, psi: np.ndarray, dt: float, cfg: KrylovConfig):
    """One exp(-i H dt) application; returns None if m_max is insufficient."""
    norm0 = np.linalg.norm(psi)
    if norm0 == 0.0:
        return psi.copy()
    v = psi / norm0
    n = psi.size
    m_max = min(cfg.m_max, n)
    basis = np.empty((m_max, n), dtype=np.complex128)
    alpha = np.empty(m_max)
    beta = np.empty(m_max + 1)
    basis[0] = v
    breakdown = False
    m = 0
    scale = None
    for j in range(m_max):
        w = matrix @ basis[j]
        if j > 0:
            w -= beta[j] * basis[j - 1]
        alpha[j] = np.real(np.vdot(basis[j], w))
        w -= alpha[j] * basis[j]
        # One reorthogonalization pass: Lanczos loses orthogonality in
        # finite precision, which would spoil the 1e-12 residual target.
        w -= basis[: j + 1].T @ (basis[: j + 1].conj() @ w)
        beta[j + 1] = np.linalg.norm(w)
        m = j + 1
        if scale is None:
            scale = abs(alpha[0]) + beta[1] + 1e-300
        if beta[j + 1] <= 1e-14 * scale:
            breakdown = True  # invariant subspace: projection is exact
            break
        if j + 1 < m_max:
            basis[j + 1] = w / beta[j + 1]
        if m < cfg.m_min:
            continue
        small = _expm_tridiag(alpha[:m], beta[1:m], dt)
        if beta[m] * abs(small[-1]) < cfg.tol:
            return norm0 * (basis[:m].T @ small)
    if breakdown:
        small = _expm_tridiag(alpha[:m], beta[1:m], dt)
        return norm0 * (basis[:m].T @ small)
    return None


def _expm_tridiag(alpha: np.ndarray, beta: np.ndarray, dt: float) -> np.ndarray:
    """First column of exp(-i*dt*T) for the real symmetric tridiagonal T."""
    if alpha.size == 1:
        return np.array([np.exp(-1j * dt * alpha[0])])
    evals, evecs = scipy.linalg.eigh_tridiagonal(alpha, beta)
    return evecs @ (np.exp(-1j * dt * evals) * evecs[0].conj())


def evolve(
    H: SparseOperator,
    psi: np.ndarray,
    t_ns: float,
    cfg: KrylovConfig = DEFAULT_CONFIG,
) -> np.ndarray:
    """Apply exp(-i H t) to a normalized state.

    The result is renormalized after every substep; the accumulated
    Krylov error is bounded by roughly ``tol`` per substep taken.
    """
    if not H.hermitian:
        raise ValueError("evolve requires a Hermitian operator")
    if psi.size != H.dim:
        raise ValueError(f"state dimension {psi.size} != operator dimension {H.dim}")
    if t_ns < 0:
        raise ValueError("t_ns must be >= 0")
    psi = np.asarray(psi, dtype=np.complex128).copy()
    if abs(np.linalg.norm(psi) - 1.0) > 1e-6:
        raise ValueError("evolve expects a normalized state")
    if t_ns == 0.0:
        return psi
    remaining = float(t_ns)
    step = min(cfg.step_ns, remaining)
    min_step = cfg.step_ns * 2.0**-24
    while remaining > 1e-12 * t_ns:
        dt = min(step, remaining)
        result = _lanczos_substep(H.matrix, psi, dt, cfg)
        if result is None:
            step = dt / 2.0
            if step < min_step:
                raise PropagationError(
                    f"no convergence at substep {step:.3g} ns; Hamiltonian may be pathological"
                )
            continue
        psi = result
        nrm = np.linalg.norm(psi)
        if abs(nrm - 1.0) > 1e-6:
            raise PropagationError(f"norm drifted to {nrm:.6f} within one substep")
        psi /= nrm
        remaining -= dt
    return psi


def evolve_observed(
    H: SparseOperator,
    psi: np.ndarray,
    times_ns: Sequence[float],
    observe: Callable[[int, float, np.ndarray], None],
    cfg: KrylovConfig = DEFAULT_CONFIG,
) -> np.ndarray:
    """Evolve along a sorted time grid, calling ``observe`` at each point.

    ``observe(i, t, psi)`` must treat the state as read-only.  Returns the
    state at the final grid time.
    """
    times = np.asarray(times_ns, dtype=float)
    if times.size == 0:
        raise ValueError("empty time grid")
    if np.any(np.diff(times) < 0) or times[0] < 0:
        raise ValueError("times must be sorted and non-negative")
    current = np.asarray(psi, dtype=np.complex128).copy()
    t_prev = 0.0
    for i, t in enumerate(times):
        if t > t_prev:
            current = evolve(H, current, t - t_prev, cfg)
            t_prev = t
        observe(i, t, current)
    return current


def dense_evolve(H: SparseOperator, psi: np.ndarray, t_ns: float) -> np.ndarray:
    """Exact exp(-i H t) via dense eigendecomposition (test oracle).

    Limited to dimensions <= 4096 where the dense solve is affordable.
    """
    if H.dim > 4096:
        raise ValueError(f"dense_evolve limited to dim <= 4096, got {H.dim}")
    if not H.hermitian:
        raise ValueError("dense_evolve requires a Hermitian operator")
    if psi.size != H.dim:
        raise ValueError("state/operator dimension mismatch")
    evals, evecs = np.linalg.eigh(H.to_dense())
    return evecs @ (np.exp(-1j * evals * t_ns) * (evecs.conj().T @ psi))


@lru_cache(maxsize=None)
def _z_signs(dim: int, site: int) -> np.ndarray:
    n_sites = dim.bit_length() - 1
    if 2**n_sites != dim:
        raise ValueError("expect_z requires a qubit (power-of-two) space")
    if not 0 <= site < n_sites:
        raise ValueError(f"site {site} outside [0, {n_sites})")
    signs = 1.0 - 2.0 * (((np.arange(dim, dtype=np.int64) >> site) & 1).astype(float))
    signs.flags.writeable = False
    return signs


def expect_z(psi: np.ndarray, site: Site | int) -> float:
    """<sigma^z> at a site; +1 for empty, -1 for occupied."""
    return float(np.real(np.dot(_z_signs(psi.size, site_index(site)), np.abs(psi) ** 2)))
