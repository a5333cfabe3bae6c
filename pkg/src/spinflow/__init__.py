"""Spin transport on a two-leg superconducting qubit ladder.

A state-vector engine and CLI for infinite-temperature autocorrelation
measurements via analog Haar-random states, with disorder/tilt knobs for
localization studies, a quantum-jump decoherence model, and the drive
calibration math used to realize the protocol on hardware.
"""

__version__ = "0.1.0"

from .calib import (
    CrosstalkFit,
    CrosstalkMatrix,
    FitError,
    MixerMap,
    RabiFit,
    amp_to_rabi,
    apply_crosstalk,
    correct_crosstalk,
    effective_rabi,
    extract_crosstalk,
    fit_rabi,
    rabi_probability,
    rabi_to_amp,
)
from .haar import (
    EntropyReport,
    generate_haar_state,
    haar_random_state,
    haar_target_entropy,
    ks_rejection_threshold,
    participation_entropy,
    porter_thomas_ks,
    sample_drive_plan,
    sampled_participation_entropy,
)
from .model import (
    DEFAULT_DIM_BUDGET,
    DOWN,
    TWO_PI_MHZ,
    UP,
    DimensionBudgetError,
    DrivePlan,
    LadderSpec,
    PotentialField,
    Site,
    SparseOperator,
    basis_index,
    basis_state,
    build_bose_hubbard,
    build_drive,
    build_interaction,
    build_onsite,
    leakage_probability,
    make_ladder,
    project_to_hardcore,
    sample_disorder,
    tilt_potential,
)
from .opensys import (
    ObservableSeries,
    RelaxationSpec,
    dense_lindblad,
    evolve_trajectories,
    particle_number,
    sz_site,
)
from .propagator import (
    KrylovConfig,
    PropagationError,
    dense_evolve,
    evolve,
    evolve_observed,
    expect_z,
)
from .seeding import derive_seed, rng_from
from .transport import (
    CorrelationSeries,
    FitWindowError,
    PowerLawFit,
    ProductStateSeries,
    classify_transport,
    exact_autocorrelation,
    fit_power_law,
    measure_autocorrelation,
    product_state_autocorrelation,
)
