"""Experiment configuration: a flat key/value TOML file.

Every run is fully described by one config file plus the package
version: the root seed is mandatory (nothing is ever seeded from the
clock), sweep lists must be explicit, and unknown keys are rejected so
typos fail loudly.  ``schema_version`` guards against stale files.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SCHEMA_VERSION = 1

SCENARIOS = (
    "clean-diffusion",
    "disorder-sweep",
    "stark-sweep",
    "haar-entropy",
    "leakage-check",
    "decoherence-check",
    "product-state-study",
    "calib-demo",
)

LADDER_PRESETS = ("uniform", "scattered", "device", "inline")


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""


def default_haar_seeds(n_sites: int) -> int:
    """Haar seeds per measurement, scaled to the typicality error.

    Single-seed error is O(2^{-(N-1)/2}): visible at small N, negligible
    at large N.
    """
    if n_sites <= 12:
        return 10
    if n_sites < 20:
        return 3
    return 1


@dataclass
class ExperimentConfig:
    """One experiment run; see the README for the file schema."""

    scenario: str
    seed: int
    out_dir: Path
    schema_version: int = SCHEMA_VERSION

    ladder_preset: str = "device"
    L: int = 6
    ladder_inline: dict | None = None

    # sweep axes and averaging
    w_mhz: list[float] = field(default_factory=list)
    ws_mhz: list[float] = field(default_factory=list)
    n_realizations: int = 10
    n_haar_seeds: int | None = None

    # time grids and Haar generation
    t_max_ns: float = 200.0
    dt_ns: float = 4.0
    t_r_ns: float = 200.0
    tr_grid_ns: list[float] = field(default_factory=list)
    n_shots: int = 0

    # power-law fit windows (low/high apply per tilt strength)
    fit_window_ns: tuple[float, float] = (50.0, 200.0)
    fit_window_high_ns: tuple[float, float] = (100.0, 400.0)
    stark_window_split_mhz: float = 22.0

    # decoherence
    t1_ns: float = 32100.0
    n_traj: int = 500
    decoherence_c11: bool = False

    # leakage
    anharmonicity_mhz: float | None = None

    # product-state study
    product_ws_mhz: float = 60.0

    # numerics
    krylov_tol: float = 1e-12
    krylov_mmax: int = 30
    substep_ns: float = 5.0

    # output
    figures: bool = True
    threads: int = 1

    def __post_init__(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(
                f"schema_version {self.schema_version} unsupported (expected {SCHEMA_VERSION})"
            )
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; choose from {SCENARIOS}")
        if self.ladder_preset not in LADDER_PRESETS:
            raise ConfigError(f"unknown ladder preset {self.ladder_preset!r}")
        if self.ladder_preset == "inline" and not self.ladder_inline:
            raise ConfigError("ladder_preset = 'inline' requires ladder_* coupling keys")
        if self.L < 1:
            raise ConfigError("L must be >= 1")
        if self.scenario == "disorder-sweep" and not self.w_mhz:
            raise ConfigError("disorder-sweep requires a non-empty w_mhz list")
        if self.scenario == "stark-sweep" and not self.ws_mhz:
            raise ConfigError("stark-sweep requires a non-empty ws_mhz list")
        if self.n_realizations < 1:
            raise ConfigError("n_realizations must be >= 1")
        if self.n_haar_seeds is not None and self.n_haar_seeds < 1:
            raise ConfigError("n_haar_seeds must be >= 1")
        if self.dt_ns <= 0 or self.t_max_ns <= 0:
            raise ConfigError("time grid parameters must be positive")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.n_traj < 1:
            raise ConfigError("n_traj must be >= 1")
        self.out_dir = Path(self.out_dir)
        self.fit_window_ns = _as_window(self.fit_window_ns, "fit_window_ns")
        self.fit_window_high_ns = _as_window(self.fit_window_high_ns, "fit_window_high_ns")

    def haar_seed_count(self, n_sites: int) -> int:
        return self.n_haar_seeds if self.n_haar_seeds is not None else default_haar_seeds(n_sites)

    def to_dict(self) -> dict:
        """Plain-type echo of this config (JSON/TOML safe)."""
        out = {}
        for f in fields(self):
            val = getattr(self, f.name)
            if isinstance(val, Path):
                val = str(val)
            elif isinstance(val, tuple):
                val = list(val)
            out[f.name] = val
        return out


def _as_window(value, name: str) -> tuple[float, float]:
    try:
        lo, hi = float(value[0]), float(value[1])
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"{name} must be a [lo, hi] pair") from exc
    if lo >= hi:
        raise ConfigError(f"{name} must satisfy lo < hi")
    return (lo, hi)


_KNOWN_KEYS = {f.name for f in fields(ExperimentConfig)}


def config_from_dict(data: dict) -> ExperimentConfig:
    data = dict(data)
    inline = {
        key[len("ladder_") :]: data.pop(key)
        for key in list(data)
        if key.startswith("ladder_") and key not in ("ladder_preset", "ladder_inline")
    }
    if inline:
        data["ladder_inline"] = inline
        if "L" in inline:
            data.setdefault("L", int(inline["L"]))
    unknown = set(data) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for required in ("scenario", "seed", "out_dir"):
        if required not in data:
            raise ConfigError(f"missing required config key {required!r}")
    return ExperimentConfig(**data)


def load_config(path: str | Path) -> ExperimentConfig:
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data)
