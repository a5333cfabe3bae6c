"""Drive-calibration math: Rabi fits, mixer saturation, XY crosstalk.

These are the analysis formulas used to calibrate a resonant microwave
drive on synthetic scan data: decaying Rabi oscillations fitted by
FFT-seeded damped Gauss-Newton, the smooth piecewise map between IQ
amplitude and Rabi frequency (linear below saturation, saturating
exponential above, with matching value and slope at the knee), the
effective Rabi frequency of a detuned qubit under a crosstalk tone, and
the inversion of the signal-crosstalk matrix used to precompensate drive
vectors.  Frequencies are ordinary MHz, times ns, phases radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import TWO_PI_MHZ


class FitError(RuntimeError):
    """Nonlinear fit failed: degenerate data or no convergence."""


class CrosstalkError(RuntimeError):
    """Crosstalk matrix is singular or too ill-conditioned to invert."""


@dataclass(frozen=True)
class RabiFit:
    """Decaying-oscillation parameters ``A exp(-t/T1) cos(Omega t) + B``."""

    omega_mhz: float
    t1_ns: float
    amplitude: float
    offset: float

    def __post_init__(self):
        if self.omega_mhz < 0:
            raise ValueError("omega_mhz must be >= 0")
        if not self.t1_ns > 0:
            raise ValueError("t1_ns must be positive")


@dataclass(frozen=True)
class MixerMap:
    """IQ-amplitude to Rabi-frequency map of a saturating mixer.

    ``eta`` is the small-signal slope (MHz per unit amplitude), ``v_sat``
    the end of the linear region, ``omega_max`` the asymptotic Rabi
    frequency.  ``omega_max > eta * v_sat`` strictly, otherwise the
    exponential branch degenerates.
    """

    eta: float
    v_sat: float
    omega_max: float

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.v_sat < 0:
            raise ValueError("v_sat must be >= 0")
        if not self.omega_max > self.eta * self.v_sat:
            raise ValueError("need omega_max > eta * v_sat (strict)")


@dataclass(frozen=True)
class CrosstalkMatrix:
    """Complex crosstalk coefficients with unit diagonal."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
            raise ValueError("crosstalk matrix must be square")
        if not np.all(vals[np.diag_indices_from(vals)] == 1.0):
            raise ValueError("crosstalk matrix must have unit diagonal")
        if not np.all(np.isfinite(vals.real)) or not np.all(np.isfinite(vals.imag)):
            raise ValueError("crosstalk matrix contains non-finite entries")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @classmethod
    def identity(cls, n: int) -> "CrosstalkMatrix":
        return cls(np.eye(n, dtype=np.complex128))

    @classmethod
    def from_coefficients(cls, c: np.ndarray, phi: np.ndarray) -> "CrosstalkMatrix":
        """Build from magnitude and phase arrays (diagonal forced to 1)."""
        vals = np.asarray(c, dtype=float) * np.exp(1j * np.asarray(phi, dtype=float))
        np.fill_diagonal(vals, 1.0)
        return cls(vals)


@dataclass(frozen=True)
class CrosstalkFit:
    """Extracted crosstalk coefficient; ``identifiable`` is False when the
    scan is consistent with zero crosstalk at its noise level."""

    c_ij: float
    phi_ij: float
    identifiable: bool


def rabi_probability(t_ns, fit: RabiFit):
    """Excited-state probability ``(1 - exp(-t/T1) cos(Omega t)) / 2``.

    The ideal ground-start curve; always in [0, 1].
    """
    t = np.asarray(t_ns, dtype=float)
    if np.any(t < 0):
        raise ValueError("t_ns must be >= 0")
    omega_ang = TWO_PI_MHZ * fit.omega_mhz
    envelope = np.exp(-t / fit.t1_ns) if np.isfinite(fit.t1_ns) else 1.0
    out = 0.5 * (1.0 - envelope * np.cos(omega_ang * t))
    return float(out) if np.ndim(t_ns) == 0 else out


def _rabi_model(t, params):
    amp, offset, omega_ang, gamma = params
    return amp * np.exp(-gamma * t) * np.cos(omega_ang * t) + offset


def _damped_gauss_newton(residual_fn, params0, max_iter=200, rel_tol=1e-10):
    """Least squares via Gauss-Newton with step halving and a numeric Jacobian."""
    params = np.asarray(params0, dtype=float)
    cost = float(np.sum(residual_fn(params) ** 2))
    for _ in range(max_iter):
        r = residual_fn(params)
        jac = np.empty((r.size, params.size))
        for k in range(params.size):
            h = 1e-7 * max(abs(params[k]), 1e-7)
            up = params.copy()
            up[k] += h
            down = params.copy()
            down[k] -= h
            jac[:, k] = (residual_fn(up) - residual_fn(down)) / (2 * h)
        try:
            step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        except np.linalg.LinAlgError as exc:
            raise FitError("normal equations are singular") from exc
        damping = 1.0
        for _ in range(25):
            trial = params + damping * step
            trial_cost = float(np.sum(residual_fn(trial) ** 2))
            if trial_cost <= cost:
                break
            damping *= 0.5
        else:
            return params  # no descent direction left: converged to noise floor
        moved = np.linalg.norm(damping * step)
        params = params + damping * step
        cost = trial_cost
        if moved <= rel_tol * max(np.linalg.norm(params), 1.0):
            return params
    raise FitError("Gauss-Newton did not converge within the iteration cap")


def fit_rabi(t_ns, p1) -> RabiFit:
    """Fit ``A exp(-t/T1) cos(Omega t) + B`` to a Rabi scan.

    The frequency is seeded from the dominant FFT peak of the detrended
    signal, then refined by damped Gauss-Newton.  Raises
    :class:`FitError` when no oscillation is detectable or the iteration
    cap is hit.
    """
    t = np.asarray(t_ns, dtype=float)
    y = np.asarray(p1, dtype=float)
    if t.size != y.size or t.size < 10:
        raise ValueError("need at least 10 (t, p1) samples")
    order = np.argsort(t)
    t, y = t[order], y[order]

    detrended = y - y.mean()
    if np.max(np.abs(detrended)) < 1e-9:
        raise FitError("no oscillation detectable: signal is flat")
    dt = float(np.median(np.diff(t)))
    spectrum = np.abs(np.fft.rfft(detrended))
    freqs = np.fft.rfftfreq(t.size, d=dt)
    peak = int(np.argmax(spectrum[1:])) + 1
    others = np.delete(spectrum[1:], peak - 1)
    noise_floor = np.median(others) if others.size else 0.0
    if spectrum[peak] < 5.0 * max(noise_floor, 1e-12):
        raise FitError("no oscillation detectable: no dominant spectral peak")
    omega0 = 2.0 * math.pi * freqs[peak]
    if omega0 * (t[-1] - t[0]) < 4.0 * math.pi:
        raise FitError("scan must span at least two oscillation periods")

    amp0 = y[0] - y.mean()
    if abs(amp0) < 0.1 * np.max(np.abs(detrended)):
        amp0 = -np.max(np.abs(detrended))
    params0 = np.array([amp0, y.mean(), omega0, 0.1 / (t[-1] - t[0])])

    def residual(params):
        return _rabi_model(t, params) - y

    amp, offset, omega_ang, gamma = _damped_gauss_newton(residual, params0)
    if omega_ang < 0:
        omega_ang = -omega_ang  # cosine is even; fold the sign into convention
    t1 = 1.0 / gamma if gamma > 0 else math.inf
    return RabiFit(
        omega_mhz=omega_ang / TWO_PI_MHZ, t1_ns=t1, amplitude=amp, offset=offset
    )


def effective_rabi(
    delta_mhz: float,
    omega_i_mhz: float,
    omega_ij_mhz: float,
    phi_ij: float,
    phi_ii: float,
) -> float:
    """Effective Rabi frequency of a driven qubit with one crosstalk tone.

    ``sqrt(Delta^2 + Omega_i^2 + Omega_ij^2
    + 2 Omega_i Omega_ij cos(phi_ij - phi_ii))``; reduces to
    ``sqrt(Delta^2 + Omega^2)`` without crosstalk.
    """
    if omega_i_mhz < 0 or omega_ij_mhz < 0:
        raise ValueError("Rabi amplitudes must be >= 0")
    return math.sqrt(
        delta_mhz**2
        + omega_i_mhz**2
        + omega_ij_mhz**2
        + 2.0 * omega_i_mhz * omega_ij_mhz * math.cos(phi_ij - phi_ii)
    )


def extract_crosstalk(
    phi_ii,
    omega_r_mhz,
    delta_mhz: float,
    omega_i_mhz: float,
    omega_j_mhz: float,
) -> CrosstalkFit:
    """Recover ``(c_ij, phi_ij)`` from an effective-Rabi phase scan.

    The squared model is linear in ``(1, cos phi_ii, sin phi_ii)``, so the
    coefficients come from one linear solve; the crosstalk amplitude and
    phase follow from the quadrature pair.  Returns ``c_ij = 0`` flagged
    non-identifiable when the fitted amplitude is below twice its own
    standard error.
    """
    phi = np.asarray(phi_ii, dtype=float)
    omega_r = np.asarray(omega_r_mhz, dtype=float)
    if phi.size != omega_r.size or phi.size < 8:
        raise ValueError("need >= 8 scan points")
    if phi.max() - phi.min() < 2.0 * math.pi * 0.95:
        raise ValueError("scan must cover a full 2*pi period of phi_ii")
    if omega_i_mhz <= 0 or omega_j_mhz <= 0:
        raise ValueError("drive amplitudes must be positive")

    design = np.column_stack([np.ones_like(phi), np.cos(phi), np.sin(phi)])
    target = omega_r**2
    coef, _, _, _ = np.linalg.lstsq(design, target, rcond=None)
    resid = target - design @ coef
    dof = max(phi.size - 3, 1)
    sigma2 = float(np.sum(resid**2)) / dof
    cov = sigma2 * np.linalg.inv(design.T @ design)
    a, b = coef[1], coef[2]
    quad = math.hypot(a, b)
    quad_err = math.sqrt(max(cov[1, 1] + cov[2, 2], 0.0))
    if quad < 2.0 * quad_err:
        return CrosstalkFit(c_ij=0.0, phi_ij=0.0, identifiable=False)
    omega_ij = quad / (2.0 * omega_i_mhz)
    phi_fit = math.atan2(b, a)
    return CrosstalkFit(c_ij=omega_ij / omega_j_mhz, phi_ij=phi_fit, identifiable=True)


def amp_to_rabi(v, mixer: MixerMap):
    """Rabi frequency (MHz) for an IQ amplitude; linear then saturating."""
    v_arr = np.asarray(v, dtype=float)
    if np.any(v_arr < 0):
        raise ValueError("amplitude must be >= 0")
    linear = mixer.eta * v_arr
    gap = mixer.omega_max - mixer.eta * mixer.v_sat
    saturated = mixer.omega_max - gap * np.exp(
        -mixer.eta * (v_arr - mixer.v_sat) / gap
    )
    out = np.where(v_arr <= mixer.v_sat, linear, saturated)
    return float(out) if np.ndim(v) == 0 else out


def rabi_to_amp(omega_mhz, mixer: MixerMap):
    """Inverse of :func:`amp_to_rabi`; only ``omega < omega_max`` is reachable."""
    omega = np.asarray(omega_mhz, dtype=float)
    if np.any(omega < 0):
        raise ValueError("omega must be >= 0")
    if np.any(omega >= mixer.omega_max):
        raise ValueError("Rabi frequency at or above omega_max is unreachable")
    gap = mixer.omega_max - mixer.eta * mixer.v_sat
    linear = omega / mixer.eta
    with np.errstate(divide="ignore"):
        saturated = mixer.v_sat + (gap / mixer.eta) * np.log(gap / (mixer.omega_max - omega))
    out = np.where(omega <= mixer.eta * mixer.v_sat, linear, saturated)
    return float(out) if np.ndim(omega_mhz) == 0 else out


def signal_crosstalk_matrix(m_omega: CrosstalkMatrix, eta) -> np.ndarray:
    """Signal-level matrix ``diag(eta) M_Omega diag(eta)^-1``."""
    eta = np.asarray(eta, dtype=float)
    if eta.size != m_omega.dim:
        raise ValueError("eta must provide one scale per channel")
    if np.any(eta <= 0):
        raise ValueError("channel scales must be positive")
    return (eta[:, None] * m_omega.values) / eta[None, :]


def apply_crosstalk(m_omega: CrosstalkMatrix, eta, drive: np.ndarray) -> np.ndarray:
    """Signals actually seen by the qubits for a commanded drive vector."""
    return signal_crosstalk_matrix(m_omega, eta) @ np.asarray(drive, dtype=np.complex128)


def correct_crosstalk(m_omega: CrosstalkMatrix, eta, desired: np.ndarray) -> np.ndarray:
    """Precompensated drive vector: ``M_V^{-1} @ desired`` via LU solve.

    Raises :class:`CrosstalkError` when the condition number exceeds
    1e12 (the correction would amplify noise past any useful precision).
    """
    m_v = signal_crosstalk_matrix(m_omega, eta)
    cond = float(np.linalg.cond(m_v))
    if not np.isfinite(cond) or cond > 1e12:
        raise CrosstalkError(f"crosstalk matrix condition number {cond:.3g} exceeds 1e12")
    desired = np.asarray(desired, dtype=np.complex128)
    if desired.size != m_omega.dim:
        raise ValueError("drive vector length does not match the matrix")
    return np.linalg.solve(m_v, desired)
