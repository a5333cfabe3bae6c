"""Two-leg qubit ladder: geometry, couplings, and Hamiltonian builders.

Unit conventions
----------------
All user-facing frequencies are ordinary frequencies in MHz (the value of
``X / 2pi``), all times are in ns, and hbar = 1.  Hamiltonian matrix
elements are stored in angular units of rad/ns, so a coupling of ``c``
MHz enters the matrix as ``2*pi*1e-3*c``.

Basis conventions
-----------------
Sites are indexed linearly as ``(rung-1)*2 + leg_offset`` with
``leg_offset`` 0 for the upper leg and 1 for the lower leg.  Basis states
are little-endian over this linear index: the occupation of site ``s`` is
the ``s``-th base-``local_dim`` digit of the basis integer.  The sign
convention is ``sigma^z|0> = +|0>``, so ``(sigma^z + 1)/2`` projects onto
the empty state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .seeding import rng_from

TWO_PI_MHZ = 2.0 * math.pi * 1e-3
"""rad/ns per MHz of ordinary frequency."""

DEFAULT_DIM_BUDGET = 2**22
"""Largest Hilbert dimension a full-state-vector run may allocate."""

UP = "up"
DOWN = "down"

# Device coupling statistics (MHz): (mean, standard deviation).
DEVICE_PARALLEL = (7.3, 0.1)
DEVICE_RUNG = (6.6, 0.2)
DEVICE_DIAG = (1.5, 0.3)
DEVICE_NNN_PARALLEL = (0.7, 0.2)
DEVICE_ANHARMONICITY = (222.0, 22.0)
DEVICE_PRESET_SEED = 0x5D1A


class DimensionBudgetError(RuntimeError):
    """Requested Hilbert dimension exceeds the configured memory budget."""


@dataclass(frozen=True)
class Site:
    """One qubit of the ladder, addressed by rung (1-based) and leg."""

    rung: int
    leg: str

    def __post_init__(self):
        if self.rung < 1:
            raise ValueError(f"rung must be >= 1, got {self.rung}")
        if self.leg not in (UP, DOWN):
            raise ValueError(f"leg must be '{UP}' or '{DOWN}', got {self.leg!r}")

    @property
    def index(self) -> int:
        """Linear site index used for basis-digit addressing."""
        return (self.rung - 1) * 2 + (0 if self.leg == UP else 1)


def site_index(site: Site | int) -> int:
    return site.index if isinstance(site, Site) else int(site)


def all_sites(n_rungs: int) -> list[Site]:
    return [Site(j, leg) for j in range(1, n_rungs + 1) for leg in (UP, DOWN)]


def _as_float_array(values, shape, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class LadderSpec:
    """Geometry and coupling constants of the two-leg ladder.

    Couplings are ordinary frequencies in MHz.  ``couplings_parallel``
    holds the intrachain bonds, shape ``(L-1, 2)`` indexed ``(j, leg)``;
    ``couplings_rung`` the vertical bonds, shape ``(L,)``; the diagonal
    arrays the two cross couplings between the legs, shape ``(L-1,)``;
    and ``couplings_nnn_parallel`` the next-nearest intrachain bonds,
    shape ``(L-2, 2)``.  ``anharmonicity`` (MHz per site, shape
    ``(2L,)``) is required iff ``local_dim == 3``.
    """

    L: int
    couplings_parallel: np.ndarray
    couplings_rung: np.ndarray
    couplings_diag_down: np.ndarray | None = None
    couplings_diag_up: np.ndarray | None = None
    couplings_nnn_parallel: np.ndarray | None = None
    local_dim: int = 2
    anharmonicity: np.ndarray | None = None
    dim_budget: int = DEFAULT_DIM_BUDGET

    def __post_init__(self):
        if self.L < 1:
            raise ValueError(f"L must be >= 1, got {self.L}")
        if self.local_dim not in (2, 3):
            raise ValueError(f"local_dim must be 2 or 3, got {self.local_dim}")
        L = self.L
        object.__setattr__(
            self,
            "couplings_parallel",
            _as_float_array(self.couplings_parallel, (max(L - 1, 0), 2), "couplings_parallel"),
        )
        object.__setattr__(
            self, "couplings_rung", _as_float_array(self.couplings_rung, (L,), "couplings_rung")
        )
        for name in ("couplings_diag_down", "couplings_diag_up"):
            val = getattr(self, name)
            if val is None:
                val = np.zeros(max(L - 1, 0))
            object.__setattr__(self, name, _as_float_array(val, (max(L - 1, 0),), name))
        nnn = self.couplings_nnn_parallel
        if nnn is None:
            nnn = np.zeros((max(L - 2, 0), 2))
        object.__setattr__(
            self,
            "couplings_nnn_parallel",
            _as_float_array(nnn, (max(L - 2, 0), 2), "couplings_nnn_parallel"),
        )
        if self.local_dim == 3:
            if self.anharmonicity is None:
                raise ValueError("anharmonicity is required when local_dim == 3")
            object.__setattr__(
                self,
                "anharmonicity",
                _as_float_array(self.anharmonicity, (self.n_sites,), "anharmonicity"),
            )
        elif self.anharmonicity is not None:
            raise ValueError("anharmonicity only applies to local_dim == 3")
        if self.hilbert_dim > self.dim_budget:
            raise DimensionBudgetError(
                f"Hilbert dimension {self.local_dim}^{self.n_sites} = {self.hilbert_dim} "
                f"exceeds the budget of {self.dim_budget}; reduce L or raise dim_budget"
            )

    @property
    def n_sites(self) -> int:
        return 2 * self.L

    @property
    def hilbert_dim(self) -> int:
        return self.local_dim**self.n_sites

    def bonds(self) -> list[tuple[int, int, float]]:
        """All hopping bonds as ``(site_a, site_b, J_mhz)`` with a < b.

        Enumeration order is fixed (parallel up, parallel down, rung,
        diagonal down, diagonal up, next-nearest up, next-nearest down)
        so operator construction is reproducible.
        """
        L = self.L
        out: list[tuple[int, int, float]] = []
        for leg in (0, 1):
            for j in range(L - 1):
                out.append((2 * j + leg, 2 * (j + 1) + leg, self.couplings_parallel[j, leg]))
        for j in range(L):
            out.append((2 * j, 2 * j + 1, self.couplings_rung[j]))
        for j in range(L - 1):
            out.append((2 * j, 2 * (j + 1) + 1, self.couplings_diag_down[j]))
        for j in range(L - 1):
            out.append((2 * j + 1, 2 * (j + 1), self.couplings_diag_up[j]))
        for leg in (0, 1):
            for j in range(L - 2):
                out.append((2 * j + leg, 2 * (j + 2) + leg, self.couplings_nnn_parallel[j, leg]))
        return [(a, b, j) for (a, b, j) in out if j != 0.0]

    def with_local_dim(self, local_dim: int, anharmonicity=None) -> "LadderSpec":
        """Copy of this spec on a different local dimension."""
        if local_dim == 2:
            return replace(self, local_dim=2, anharmonicity=None)
        if anharmonicity is None:
            anharmonicity = self.anharmonicity
        if anharmonicity is not None and np.ndim(anharmonicity) == 0:
            anharmonicity = np.full(self.n_sites, float(anharmonicity))
        return replace(self, local_dim=3, anharmonicity=anharmonicity)


@dataclass(frozen=True)
class PotentialField:
    """Per-site on-site potential (MHz), length 2L."""

    w: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.w, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("potential must be a non-empty 1-D array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("potential contains non-finite values")
        arr.flags.writeable = False
        object.__setattr__(self, "w", arr)

    @property
    def n_sites(self) -> int:
        return self.w.size


@dataclass(frozen=True)
class DrivePlan:
    """Resonant microwave drive: per-site Rabi amplitude and phase.

    ``omega`` is the Rabi frequency in MHz (ordinary), ``phi`` the pulse
    phase in radians, ``duration_ns`` the drive length t_R.
    """

    omega: np.ndarray
    phi: np.ndarray
    duration_ns: float

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float)
        phi = np.asarray(self.phi, dtype=float)
        if omega.shape != phi.shape or omega.ndim != 1:
            raise ValueError("omega and phi must be 1-D arrays of equal length")
        if np.any(omega < 0):
            raise ValueError("Rabi amplitudes must be non-negative")
        if np.any((phi <= -math.pi) | (phi > math.pi)):
            raise ValueError("phases must lie in (-pi, pi]")
        if self.duration_ns < 0:
            raise ValueError("duration_ns must be >= 0")
        omega.flags.writeable = False
        phi.flags.writeable = False
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def uniform(cls, n_sites: int, omega_mhz: float, phi: float = 0.0, duration_ns: float = 200.0):
        return cls(np.full(n_sites, omega_mhz), np.full(n_sites, phi), duration_ns)


@dataclass(frozen=True)
class SparseOperator:
    """Hermitian-flagged sparse operator on the product space.

    Backed by a CSR matrix with sorted, duplicate-free, zero-free rows;
    immutable after construction and safe to share across workers.
    """

    matrix: sp.csr_matrix
    hermitian: bool
    n_sites: int
    local_dim: int

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def __matmul__(self, psi: np.ndarray) -> np.ndarray:
        return self.matrix @ psi

    def __add__(self, other: "SparseOperator") -> "SparseOperator":
        if self.dim != other.dim or self.local_dim != other.local_dim:
            raise ValueError("operators act on different spaces")
        return SparseOperator(
            _canonical_csr(self.matrix + other.matrix),
            self.hermitian and other.hermitian,
            self.n_sites,
            self.local_dim,
        )

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def sampled_hermiticity_error(self, n_samples: int = 100, seed: int = 0) -> float:
        """Max |H[r,c] - conj(H[c,r])| over sampled stored entries."""
        coo = self.matrix.tocoo()
        if coo.nnz == 0:
            return 0.0
        rng = np.random.Generator(np.random.PCG64(seed))
        idx = rng.integers(0, coo.nnz, size=min(n_samples, coo.nnz))
        err = 0.0
        for i in idx:
            r, c, v = int(coo.row[i]), int(coo.col[i]), coo.data[i]
            err = max(err, abs(v - np.conj(self.matrix[c, r])))
        return err


def _canonical_csr(mat) -> sp.csr_matrix:
    mat = sp.csr_matrix(mat)
    mat.sum_duplicates()
    mat.eliminate_zeros()
    mat.sort_indices()
    return mat


def _finalize(rows, cols, vals, spec: LadderSpec, hermitian: bool = True) -> SparseOperator:
    dim = spec.hilbert_dim
    if rows:
        mat = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(dim, dim),
            dtype=np.complex128,
        )
    else:
        mat = sp.coo_matrix((dim, dim), dtype=np.complex128)
    op = SparseOperator(_canonical_csr(mat), hermitian, spec.n_sites, spec.local_dim)
    if hermitian and op.sampled_hermiticity_error() > 1e-14:
        raise AssertionError("constructed operator failed the sampled hermiticity check")
    return op


@lru_cache(maxsize=None)
def occupation_of_site(n_sites: int, local_dim: int, site: int) -> np.ndarray:
    """Occupation digit of ``site`` for every basis index (read-only)."""
    dim = local_dim**n_sites
    k = np.arange(dim, dtype=np.int64)
    if local_dim == 2:
        occ = (k >> site) & 1
    else:
        occ = (k // 3**site) % 3
    occ = occ.astype(np.int8)
    occ.flags.writeable = False
    return occ


@lru_cache(maxsize=None)
def total_occupation(n_sites: int, local_dim: int) -> np.ndarray:
    """Total excitation number of every basis index (read-only)."""
    dim = local_dim**n_sites
    tot = np.zeros(dim, dtype=np.int16)
    for s in range(n_sites):
        tot += occupation_of_site(n_sites, local_dim, s)
    tot.flags.writeable = False
    return tot


@lru_cache(maxsize=None)
def hardcore_mask(n_sites: int) -> np.ndarray:
    """Boolean mask of base-3 basis states with all occupations <= 1."""
    dim = 3**n_sites
    mask = np.ones(dim, dtype=bool)
    for s in range(n_sites):
        mask &= occupation_of_site(n_sites, 3, s) <= 1
    mask.flags.writeable = False
    return mask


def basis_index(occupations: Sequence[int], local_dim: int = 2) -> int:
    """Basis integer for a little-endian occupation string."""
    occ = np.asarray(occupations, dtype=np.int64)
    if np.any(occ < 0) or np.any(occ >= local_dim):
        raise ValueError("occupations out of range for local_dim")
    return int(np.dot(occ, local_dim ** np.arange(occ.size, dtype=np.int64)))


def basis_state(n_sites: int, occupations_or_index, local_dim: int = 2) -> np.ndarray:
    """Normalized state vector for a single product basis state."""
    dim = local_dim**n_sites
    if np.ndim(occupations_or_index) == 0:
        idx = int(occupations_or_index)
    else:
        idx = basis_index(occupations_or_index, local_dim)
    if not 0 <= idx < dim:
        raise ValueError(f"basis index {idx} out of range for dimension {dim}")
    psi = np.zeros(dim, dtype=np.complex128)
    psi[idx] = 1.0
    return psi


def build_interaction(spec: LadderSpec, exclude: Iterable[Site | int] = ()) -> SparseOperator:
    """Hopping Hamiltonian of the ladder in rad/ns.

    Conserves total excitation number.  Sites listed in ``exclude`` are
    decoupled (every bond touching them is dropped), which models qubits
    biased far off resonance.
    """
    if spec.local_dim != 2:
        raise ValueError("build_interaction requires local_dim == 2; see build_bose_hubbard")
    excluded = {site_index(s) for s in exclude}
    dim = spec.hilbert_dim
    k = np.arange(dim, dtype=np.int64)
    rows, cols, vals = [], [], []
    for a, b, j_mhz in spec.bonds():
        if a in excluded or b in excluded:
            continue
        amp = TWO_PI_MHZ * j_mhz
        src = k[(((k >> a) & 1) == 1) & (((k >> b) & 1) == 0)]
        dst = src ^ ((1 << a) | (1 << b))
        rows.append(dst)
        cols.append(src)
        vals.append(np.full(src.size, amp, dtype=np.complex128))
        rows.append(src)
        cols.append(dst)
        vals.append(np.full(src.size, amp, dtype=np.complex128))
    return _finalize(rows, cols, vals, spec)


def build_drive(
    spec: LadderSpec, plan: DrivePlan, mask: Iterable[Site | int] | None = None
) -> SparseOperator:
    """Resonant drive Hamiltonian in rad/ns, acting only on ``mask``.

    Breaks excitation-number conservation whenever any masked amplitude
    is nonzero.
    """
    if spec.local_dim != 2:
        raise ValueError("build_drive requires local_dim == 2")
    n = spec.n_sites
    if plan.omega.size != n:
        raise ValueError(f"drive plan covers {plan.omega.size} sites, ladder has {n}")
    sites = set(range(n)) if mask is None else {site_index(s) for s in mask}
    if not sites <= set(range(n)):
        raise ValueError("mask contains sites outside the ladder")
    dim = spec.hilbert_dim
    k = np.arange(dim, dtype=np.int64)
    rows, cols, vals = [], [], []
    for s in sorted(sites):
        if plan.omega[s] == 0.0:
            continue
        half_omega = 0.5 * TWO_PI_MHZ * plan.omega[s]
        raise_amp = half_omega * np.exp(-1j * plan.phi[s])
        src = k[((k >> s) & 1) == 0]
        dst = src | (1 << s)
        rows.append(dst)
        cols.append(src)
        vals.append(np.full(src.size, raise_amp, dtype=np.complex128))
        rows.append(src)
        cols.append(dst)
        vals.append(np.full(src.size, np.conj(raise_amp), dtype=np.complex128))
    return _finalize(rows, cols, vals, spec)


def build_onsite(spec: LadderSpec, pot: PotentialField) -> SparseOperator:
    """Diagonal on-site potential in rad/ns."""
    if pot.n_sites != spec.n_sites:
        raise ValueError(f"potential has {pot.n_sites} sites, ladder has {spec.n_sites}")
    dim = spec.hilbert_dim
    diag = np.zeros(dim)
    for s in range(spec.n_sites):
        if pot.w[s] != 0.0:
            diag += (TWO_PI_MHZ * pot.w[s]) * occupation_of_site(
                spec.n_sites, spec.local_dim, s
            )
    mat = sp.diags(diag.astype(np.complex128), format="csr")
    return SparseOperator(_canonical_csr(mat), True, spec.n_sites, spec.local_dim)


def sample_disorder(w_mhz: float, n_sites: int, seed: int) -> PotentialField:
    """Per-site potential drawn iid uniform on [-W, W] MHz."""
    if w_mhz < 0:
        raise ValueError("disorder strength must be >= 0")
    rng = rng_from(seed, "disorder")
    return PotentialField(rng.uniform(-w_mhz, w_mhz, size=n_sites))


def tilt_potential(ws_mhz: float, n_rungs: int) -> PotentialField:
    """Linear potential w = Delta*j per rung, Delta = 2*W_S/(L-1)."""
    if n_rungs < 2:
        raise ValueError("tilt requires at least 2 rungs")
    slope = 2.0 * ws_mhz / (n_rungs - 1)
    rungs = np.repeat(np.arange(1, n_rungs + 1), 2)
    return PotentialField(slope * rungs)


def build_bose_hubbard(spec: LadderSpec) -> SparseOperator:
    """Bosonic ladder Hamiltonian with occupations truncated at 2.

    Hopping carries the bosonic sqrt factors between levels, and each
    site gets the anharmonic charging term -(E_C/2) n (n-1); both in
    rad/ns.
    """
    if spec.local_dim != 3:
        raise ValueError("build_bose_hubbard requires local_dim == 3")
    n = spec.n_sites
    dim = spec.hilbert_dim
    k = np.arange(dim, dtype=np.int64)
    rows, cols, vals = [], [], []
    for a, b, j_mhz in spec.bonds():
        amp = TWO_PI_MHZ * j_mhz
        occ_a = occupation_of_site(n, 3, a).astype(np.int64)
        occ_b = occupation_of_site(n, 3, b).astype(np.int64)
        movable = (occ_a >= 1) & (occ_b <= 1)
        src = k[movable]
        dst = src - 3**a + 3**b
        factor = amp * np.sqrt(occ_a[movable] * (occ_b[movable] + 1.0))
        rows.append(dst)
        cols.append(src)
        vals.append(factor.astype(np.complex128))
        rows.append(src)
        cols.append(dst)
        vals.append(factor.astype(np.complex128))
    diag = np.zeros(dim)
    for s in range(n):
        occ = occupation_of_site(n, 3, s).astype(np.int64)
        diag -= 0.5 * TWO_PI_MHZ * spec.anharmonicity[s] * occ * (occ - 1)
    idx = np.flatnonzero(diag)
    if idx.size:
        rows.append(idx)
        cols.append(idx)
        vals.append(diag[idx].astype(np.complex128))
    return _finalize(rows, cols, vals, spec)


def leakage_probability(psi: np.ndarray, spec: LadderSpec) -> float:
    """Probability weight outside the hard-core (occupations <= 1) sector."""
    if spec.local_dim != 3:
        raise ValueError("leakage is defined for local_dim == 3 states")
    if psi.size != spec.hilbert_dim:
        raise ValueError("state dimension does not match the ladder")
    mask = hardcore_mask(spec.n_sites)
    inside = float(np.sum(np.abs(psi[mask]) ** 2))
    return min(max(1.0 - inside, 0.0), 1.0)


def project_to_hardcore(psi: np.ndarray, n_sites: int) -> np.ndarray:
    """Restrict a base-3 state to occupations <= 1, reindexed to the 2^N basis.

    The result is not renormalized; its norm deficit equals the leakage
    weight.
    """
    if psi.size != 3**n_sites:
        raise ValueError("state is not on the base-3 product space")
    k2 = np.arange(2**n_sites, dtype=np.int64)
    k3 = np.zeros(2**n_sites, dtype=np.int64)
    for s in range(n_sites):
        k3 += ((k2 >> s) & 1) * 3**s
    return psi[k3].copy()


def make_ladder(
    L: int,
    preset: str = "device",
    seed: int = DEVICE_PRESET_SEED,
    local_dim: int = 2,
    dim_budget: int = DEFAULT_DIM_BUDGET,
) -> LadderSpec:
    """Ladder presets mirroring the device statistics.

    ``uniform``
        every bond at the device mean, no next-nearest couplings;
    ``scattered``
        per-bond Gaussian scatter around the means, no next-nearest
        couplings;
    ``device``
        scattered nearest-neighbor couplings plus next-nearest diagonal
        and intrachain couplings at their measured scale.

    The scatter is reproducible: it is drawn from ``seed`` only.
    """
    if preset not in ("uniform", "scattered", "device"):
        raise ValueError(f"unknown preset {preset!r}")
    rng = rng_from(seed, "ladder", preset, L)

    def draw(stats, shape):
        mean, sigma = stats
        if preset == "uniform":
            return np.full(shape, mean)
        return np.clip(rng.normal(mean, sigma, size=shape), 0.0, None)

    parallel = draw(DEVICE_PARALLEL, (max(L - 1, 0), 2))
    rung = draw(DEVICE_RUNG, (L,))
    if preset == "device":
        diag_down = draw(DEVICE_DIAG, (max(L - 1, 0),))
        diag_up = draw(DEVICE_DIAG, (max(L - 1, 0),))
        nnn = draw(DEVICE_NNN_PARALLEL, (max(L - 2, 0), 2))
    else:
        diag_down = diag_up = nnn = None
    anh = None
    if local_dim == 3:
        anh = draw(DEVICE_ANHARMONICITY, (2 * L,))
    return LadderSpec(
        L=L,
        couplings_parallel=parallel,
        couplings_rung=rung,
        couplings_diag_down=diag_down,
        couplings_diag_up=diag_up,
        couplings_nnn_parallel=nnn,
        local_dim=local_dim,
        anharmonicity=anh,
        dim_budget=dim_budget,
    )


def ladder_to_dict(spec: LadderSpec) -> dict:
    """Flat key/value form of a ladder spec (arrays as lists)."""
    out = {
        "L": spec.L,
        "local_dim": spec.local_dim,
        "couplings_parallel_up": spec.couplings_parallel[:, 0].tolist(),
        "couplings_parallel_down": spec.couplings_parallel[:, 1].tolist(),
        "couplings_rung": spec.couplings_rung.tolist(),
        "couplings_diag_down": spec.couplings_diag_down.tolist(),
        "couplings_diag_up": spec.couplings_diag_up.tolist(),
        "couplings_nnn_parallel_up": spec.couplings_nnn_parallel[:, 0].tolist(),
        "couplings_nnn_parallel_down": spec.couplings_nnn_parallel[:, 1].tolist(),
    }
    if spec.anharmonicity is not None:
        out["anharmonicity"] = spec.anharmonicity.tolist()
    return out


def ladder_from_dict(data: dict) -> LadderSpec:
    L = int(data["L"])
    parallel = np.column_stack(
        [data["couplings_parallel_up"], data["couplings_parallel_down"]]
    ).reshape(max(L - 1, 0), 2)
    nnn = None
    if "couplings_nnn_parallel_up" in data:
        nnn = np.column_stack(
            [data["couplings_nnn_parallel_up"], data["couplings_nnn_parallel_down"]]
        ).reshape(max(L - 2, 0), 2)
    return LadderSpec(
        L=L,
        couplings_parallel=parallel,
        couplings_rung=np.asarray(data["couplings_rung"], dtype=float),
        couplings_diag_down=(
            np.asarray(data["couplings_diag_down"], dtype=float)
            if "couplings_diag_down" in data
            else None
        ),
        couplings_diag_up=(
            np.asarray(data["couplings_diag_up"], dtype=float)
            if "couplings_diag_up" in data
            else None
        ),
        couplings_nnn_parallel=nnn,
        local_dim=int(data.get("local_dim", 2)),
        anharmonicity=(
            np.asarray(data["anharmonicity"], dtype=float) if "anharmonicity" in data else None
        ),
    )


def potential_to_dict(pot: PotentialField) -> dict:
    return {"w": pot.w.tolist()}


def potential_from_dict(data: dict) -> PotentialField:
    return PotentialField(np.asarray(data["w"], dtype=float))


def drive_to_dict(plan: DrivePlan) -> dict:
    return {
        "omega": plan.omega.tolist(),
        "phi": plan.phi.tolist(),
        "duration_ns": plan.duration_ns,
    }


def drive_from_dict(data: dict) -> DrivePlan:
    return DrivePlan(
        np.asarray(data["omega"], dtype=float),
        np.asarray(data["phi"], dtype=float),
        float(data["duration_ns"]),
    )
