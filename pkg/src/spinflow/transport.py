"""Infinite-temperature autocorrelation of the first rung and transport fits.

The equal-site autocorrelator ``C_11(t) = Tr[rho_1(t) rho_1] / D`` with
``rho_1 = (sigma^z_{1,up} + sigma^z_{1,down})/2`` decomposes into four
components ``c_{mu;nu} = Tr[sigma^z_mu(t) sigma^z_nu]/D``.  Two routes
are provided:

* a typicality estimate - prepare ``|0>_nu (x) |psi_R>`` with a
  Haar-random state on the remaining qubits, evolve, and measure
  ``<sigma^z_mu>``; exact up to O(2^{-(N-1)/2}) per Haar seed;
* an exact trace - evolve every computational basis state and sum, used
  as the oracle at small sizes.

Power-law decay ``C_11 ~ t^-alpha`` is fitted on a log-log window;
``alpha ~ 0.5`` signals diffusion, small ``alpha`` frozen transport.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .haar import generate_haar_state
from .model import (
    DOWN,
    UP,
    DrivePlan,
    LadderSpec,
    PotentialField,
    Site,
    basis_state,
    build_interaction,
    build_onsite,
)
from .propagator import DEFAULT_CONFIG, KrylovConfig, evolve_observed, expect_z
from .seeding import derive_seed


class FitWindowError(ValueError):
    """The requested fit window has too few usable (positive) points."""


@dataclass(frozen=True)
class CorrelationSeries:
    """C_11(t) with its four components on a common time grid.

    Component ``c_uv`` is ``c_{mu;nu}`` with ``mu`` the measured site and
    ``nu`` the projected site (``u`` = upper-leg, ``d`` = lower-leg qubit
    of rung 1).  ``stderr`` is the standard deviation of C_11 across the
    averaged units (Haar seeds and/or disorder realizations), matching
    the error-bar convention of the underlying experiment; ``None`` for
    the exact trace.
    """

    times_ns: np.ndarray
    c_uu: np.ndarray
    c_ud: np.ndarray
    c_du: np.ndarray
    c_dd: np.ndarray
    c11: np.ndarray
    stderr: np.ndarray | None
    n_realizations: int

    def __post_init__(self):
        n = self.times_ns.size
        for name in ("c_uu", "c_ud", "c_du", "c_dd", "c11"):
            if getattr(self, name).size != n:
                raise ValueError(f"{name} length does not match the time grid")
        if self.stderr is not None and self.stderr.size != n:
            raise ValueError("stderr length does not match the time grid")
        combined = 0.25 * (self.c_uu + self.c_ud + self.c_du + self.c_dd)
        if not np.allclose(combined, self.c11, atol=1e-10):
            raise ValueError("c11 must equal the mean of its four components")


@dataclass(frozen=True)
class PowerLawFit:
    """Transport exponent from a log-log least-squares fit."""

    alpha: float
    alpha_stderr: float
    window_ns: tuple[float, float]
    r_squared: float
    n_points: int = 0

    def __post_init__(self):
        if self.window_ns[0] >= self.window_ns[1]:
            raise ValueError("fit window must satisfy t_lo < t_hi")
        if self.alpha_stderr < 0:
            raise ValueError("alpha_stderr must be >= 0")


@dataclass(frozen=True)
class ProductStateSeries:
    """Autocorrelator evaluated on a single product state."""

    times_ns: np.ndarray
    values: np.ndarray
    psi0_index: int


def _rung1_sites() -> tuple[Site, Site]:
    return Site(1, UP), Site(1, DOWN)


def _measure_components_for_state(H, psi0, times, cfg):
    """Evolve one prepared state, recording <sigma^z> on both rung-1 sites."""
    up, down = _rung1_sites()
    sz = np.empty((2, len(times)))

    def observe(i, _t, psi):
        sz[0, i] = expect_z(psi, up)
        sz[1, i] = expect_z(psi, down)

    evolve_observed(H, psi0, times, observe, cfg)
    return sz


def measure_autocorrelation(
    spec: LadderSpec,
    field: PotentialField | None,
    plan: DrivePlan | None,
    times_ns,
    seeds,
    cfg: KrylovConfig = DEFAULT_CONFIG,
    t_r_ns: float = 200.0,
) -> CorrelationSeries:
    """Typicality estimate of C_11(t), averaged over Haar seeds.

    For each seed and each projected site ``nu`` of rung 1, a Haar-random
    state is generated on the ladder minus ``nu`` (drive parameters drawn
    per seed when ``plan`` is None), the composite is evolved under the
    hopping-plus-potential Hamiltonian, and ``<sigma^z>`` of both rung-1
    sites is recorded on the grid.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("need at least one Haar seed")
    if spec.local_dim != 2:
        raise ValueError("typicality measurement runs on the hard-core ladder")
    times = np.asarray(times_ns, dtype=float)
    H = build_interaction(spec)
    if field is not None:
        H = H + build_onsite(spec, field)
    up, down = _rung1_sites()
    # per-seed component stack, indexed [seed, mu, nu, time]
    comp = np.empty((len(seeds), 2, 2, times.size))
    for i, seed in enumerate(seeds):
        for nu_idx, nu in enumerate((up, down)):
            psi0 = generate_haar_state(
                spec,
                plan=plan,
                seed=derive_seed(seed, "haar", nu.index),
                exclude=nu,
                cfg=cfg,
                t_r_ns=t_r_ns,
            )
            sz = _measure_components_for_state(H, psi0, times, cfg)
            comp[i, :, nu_idx, :] = sz
    mean = comp.mean(axis=0)
    c11_per_seed = comp.mean(axis=(1, 2))
    stderr = (
        c11_per_seed.std(axis=0, ddof=1) if len(seeds) > 1 else np.zeros(times.size)
    )
    return CorrelationSeries(
        times_ns=times,
        c_uu=mean[0, 0],
        c_ud=mean[0, 1],
        c_du=mean[1, 0],
        c_dd=mean[1, 1],
        c11=c11_per_seed.mean(axis=0),
        stderr=stderr,
        n_realizations=len(seeds),
    )


def exact_autocorrelation(
    spec: LadderSpec,
    field: PotentialField | None,
    times_ns,
    cfg: KrylovConfig = DEFAULT_CONFIG,
) -> CorrelationSeries:
    """Exact infinite-temperature trace, one evolution per basis state.

    ``sigma^z_nu`` is diagonal, so each term of the trace reduces to the
    sign of the initial occupation times the evolved expectation value.
    Feasible up to D = 4096.
    """
    if spec.local_dim != 2:
        raise ValueError("the trace oracle runs on the hard-core ladder")
    dim = spec.hilbert_dim
    if dim > 4096:
        raise ValueError(f"exact trace limited to dim <= 4096, got {dim}")
    times = np.asarray(times_ns, dtype=float)
    H = build_interaction(spec)
    if field is not None:
        H = H + build_onsite(spec, field)
    acc = np.zeros((2, 2, times.size))
    for k in range(dim):
        s_nu = np.array([1.0 - 2.0 * ((k >> 0) & 1), 1.0 - 2.0 * ((k >> 1) & 1)])
        sz = _measure_components_for_state(H, basis_state(spec.n_sites, k), times, cfg)
        acc += sz[:, None, :] * s_nu[None, :, None]
    acc /= dim
    return CorrelationSeries(
        times_ns=times,
        c_uu=acc[0, 0],
        c_ud=acc[0, 1],
        c_du=acc[1, 0],
        c_dd=acc[1, 1],
        c11=acc.mean(axis=(0, 1)),
        stderr=None,
        n_realizations=0,
    )


def product_state_autocorrelation(
    spec: LadderSpec,
    field: PotentialField | None,
    psi0,
    times_ns,
    cfg: KrylovConfig = DEFAULT_CONFIG,
) -> ProductStateSeries:
    """Single-term autocorrelator ``<psi0| rho_1(t) rho_1 |psi0>``.

    ``psi0`` is a computational basis state (index or occupation string).
    Individual terms are strongly state dependent - notably on the domain
    wall count under a tilted potential - which is why the trace average
    is the meaningful transport probe.
    """
    if spec.local_dim != 2:
        raise ValueError("product-state correlator runs on the hard-core ladder")
    psi = basis_state(spec.n_sites, psi0)
    idx = int(np.argmax(np.abs(psi)))
    times = np.asarray(times_ns, dtype=float)
    H = build_interaction(spec)
    if field is not None:
        H = H + build_onsite(spec, field)
    s_up = 1.0 - 2.0 * ((idx >> 0) & 1)
    s_down = 1.0 - 2.0 * ((idx >> 1) & 1)
    sz = _measure_components_for_state(H, psi, times, cfg)
    values = 0.5 * (s_up + s_down) * 0.5 * (sz[0] + sz[1])
    return ProductStateSeries(times_ns=times, values=values, psi0_index=idx)


def fit_power_law(series, window_ns: tuple[float, float]) -> PowerLawFit:
    """Ordinary least squares of ``ln C`` against ``ln t`` in a window.

    Accepts a :class:`CorrelationSeries` or a ``(times, values[, stderr])``
    tuple.  Points with non-positive C are dropped (noise floor); at
    least 4 usable points are required.  When per-point errors are
    available the fit is inverse-variance weighted and the slope error is
    propagated from them; otherwise it comes from the residual scatter.
    """
    if isinstance(series, CorrelationSeries):
        t, c, err = series.times_ns, series.c11, series.stderr
    elif isinstance(series, ProductStateSeries):
        t, c, err = series.times_ns, series.values, None
    else:
        t, c = np.asarray(series[0], dtype=float), np.asarray(series[1], dtype=float)
        err = np.asarray(series[2], dtype=float) if len(series) > 2 and series[2] is not None else None
    lo, hi = float(window_ns[0]), float(window_ns[1])
    if lo >= hi:
        raise ValueError("fit window must satisfy t_lo < t_hi")
    sel = (t >= lo) & (t <= hi) & (t > 0)
    if np.count_nonzero(sel) < 4:
        raise FitWindowError("fewer than 4 grid points inside the fit window")
    usable = sel & (c > 0)
    if np.count_nonzero(usable) < 4:
        raise FitWindowError("fewer than 4 positive C values inside the fit window")
    x = np.log(t[usable])
    y = np.log(c[usable])
    weights = None
    if err is not None:
        e = err[usable]
        if np.all(e > 0):
            weights = c[usable] / e  # 1/sigma of ln C
    if weights is not None:
        coef, cov = np.polyfit(x, y, 1, w=weights, cov="unscaled")
    else:
        if x.size > 2:
            coef, cov = np.polyfit(x, y, 1, cov=True)
        else:
            coef = np.polyfit(x, y, 1)
            cov = np.zeros((2, 2))
    resid = y - np.polyval(coef, x)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return PowerLawFit(
        alpha=float(-coef[0]),
        alpha_stderr=float(np.sqrt(max(cov[0, 0], 0.0))),
        window_ns=(lo, hi),
        r_squared=r2,
        n_points=int(np.count_nonzero(usable)),
    )


DIFFUSIVE = "diffusive"
SUBDIFFUSIVE = "subdiffusive"
FROZEN = "frozen"


def classify_transport(
    fit: PowerLawFit, frozen_below: float = 0.05, diffusive_halfwidth: float = 0.1
) -> str:
    """Bucket a fitted exponent: frozen, diffusive, or subdiffusive."""
    if fit.alpha < frozen_below:
        return FROZEN
    if abs(fit.alpha - 0.5) <= diffusive_halfwidth:
        return DIFFUSIVE
    return SUBDIFFUSIVE
