"""Named experiment scenarios: task grids, outputs, and the run manifest.

Each scenario expands into a grid of self-contained tasks (sweep value x
disorder realization), every task deriving its own seeds from the root
seed and its coordinates.  Tasks are executed by a worker pool when
``threads > 1``; results are merged in task order, so outputs are
byte-identical regardless of worker count.  A run writes CSV series,
JSON fit summaries, optional PNG figures, and a manifest listing every
output with its SHA-256 checksum.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__ as software_version
from . import report
from .calib import (
    CrosstalkMatrix,
    MixerMap,
    RabiFit,
    amp_to_rabi,
    apply_crosstalk,
    correct_crosstalk,
    effective_rabi,
    extract_crosstalk,
    fit_rabi,
    rabi_to_amp,
)
from .config import ExperimentConfig
from .haar import (
    generate_haar_state,
    haar_target_entropy,
    participation_entropy,
    porter_thomas_ks,
    sampled_participation_entropy,
)
from .model import (
    TWO_PI_MHZ,
    LadderSpec,
    PotentialField,
    basis_state,
    build_bose_hubbard,
    build_interaction,
    ladder_from_dict,
    ladder_to_dict,
    leakage_probability,
    make_ladder,
    project_to_hardcore,
    sample_disorder,
    tilt_potential,
)
from .opensys import RelaxationSpec, evolve_trajectories, particle_number, sz_site
from .propagator import KrylovConfig, evolve_observed
from .seeding import derive_seed
from .transport import (
    CorrelationSeries,
    classify_transport,
    fit_power_law,
    measure_autocorrelation,
    product_state_autocorrelation,
)


@dataclass
class RunManifest:
    """Everything needed to reproduce and verify a run's outputs."""

    scenario: str
    software_version: str
    config: dict
    task_seeds: dict
    outputs: dict
    wall_time_s: float
    status: str = "complete"

    def to_json(self) -> str:
        return json.dumps(
            {
                "scenario": self.scenario,
                "software_version": self.software_version,
                "status": self.status,
                "config": self.config,
                "task_seeds": self.task_seeds,
                "outputs": self.outputs,
                "wall_time_s": self.wall_time_s,
            },
            indent=2,
            sort_keys=True,
        )


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, header: list[str], rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def write_json(path: Path, payload: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def series_rows(series: CorrelationSeries):
    err = series.stderr if series.stderr is not None else np.zeros(series.times_ns.size)
    for i, t in enumerate(series.times_ns):
        yield (
            t,
            series.c_uu[i],
            series.c_ud[i],
            series.c_du[i],
            series.c_dd[i],
            series.c11[i],
            err[i],
        )


SERIES_HEADER = ["time_ns", "c_uu", "c_ud", "c_du", "c_dd", "c11", "c11_stderr"]


def fit_summary(fit, extra: dict | None = None) -> dict:
    out = {
        "alpha": fit.alpha,
        "alpha_stderr": fit.alpha_stderr,
        "window_lo_ns": fit.window_ns[0],
        "window_hi_ns": fit.window_ns[1],
        "r_squared": fit.r_squared,
        "classification": classify_transport(fit),
    }
    if extra:
        out.update(extra)
    return out


# ----------------------------------------------------------------------
# half-filled product states


def checkerboard_occupations(L: int) -> np.ndarray:
    """Half filling with alternating occupation along each leg,
    anti-aligned between the legs."""
    occ = np.zeros(2 * L, dtype=int)
    for j in range(L):
        occ[2 * j] = j % 2
        occ[2 * j + 1] = (j + 1) % 2
    return occ


def leg_pattern_occupations(pattern: np.ndarray) -> np.ndarray:
    """Both legs carrying the same occupation pattern along the rungs."""
    pattern = np.asarray(pattern, dtype=int)
    occ = np.zeros(2 * pattern.size, dtype=int)
    occ[0::2] = pattern
    occ[1::2] = pattern
    return occ


def domain_wall_count(occupations: np.ndarray) -> int:
    """Number of adjacent occupation changes along the legs (both summed)."""
    occ = np.asarray(occupations, dtype=int)
    up = occ[0::2]
    down = occ[1::2]
    return int(np.sum(up[1:] != up[:-1]) + np.sum(down[1:] != down[:-1]))


def _half_state_patterns(L: int) -> dict[str, np.ndarray]:
    """Half-filled leg patterns with increasing domain-wall count."""
    half = L // 2
    block = np.array([1] * half + [0] * (L - half))
    neel = np.array([(j + 1) % 2 for j in range(L)])
    pairs = np.array([1 if (j // 2) % 2 == 0 else 0 for j in range(L)])
    # fix filling if the pair pattern rounding spoiled it
    while pairs.sum() > half:
        pairs[np.flatnonzero(pairs)[-1]] = 0
    while pairs.sum() < half:
        pairs[np.flatnonzero(pairs == 0)[-1]] = 1
    return {"block": block, "pairs": pairs, "neel": neel}


# ----------------------------------------------------------------------
# task helpers (module level: payloads must survive pickling)


def _krylov_config(payload: dict) -> KrylovConfig:
    return KrylovConfig(
        m_max=payload["krylov_mmax"],
        step_ns=payload["substep_ns"],
        tol=payload["krylov_tol"],
    )


def _correlation_task(payload: dict) -> dict:
    """One typicality measurement: optional potential, several Haar seeds."""
    spec = ladder_from_dict(payload["ladder"])
    field = (
        PotentialField(np.asarray(payload["potential"], dtype=float))
        if payload.get("potential") is not None
        else None
    )
    series = measure_autocorrelation(
        spec,
        field,
        None,
        np.asarray(payload["times_ns"], dtype=float),
        payload["seeds"],
        cfg=_krylov_config(payload),
        t_r_ns=payload["t_r_ns"],
    )
    return {
        "c_uu": series.c_uu,
        "c_ud": series.c_ud,
        "c_du": series.c_du,
        "c_dd": series.c_dd,
        "c11": series.c11,
        "stderr": series.stderr,
    }


def _run_tasks(fn, payloads: list[dict], threads: int) -> list[dict]:
    if threads <= 1 or len(payloads) <= 1:
        return [fn(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, payloads))


def _make_spec(config: ExperimentConfig, local_dim: int = 2) -> LadderSpec:
    if config.ladder_preset == "inline":
        return ladder_from_dict(config.ladder_inline)
    spec = make_ladder(config.L, preset=config.ladder_preset, local_dim=local_dim)
    if local_dim == 3 and config.anharmonicity_mhz is not None:
        spec = spec.with_local_dim(3, anharmonicity=config.anharmonicity_mhz)
    return spec


def _time_grid(config: ExperimentConfig, t_max: float | None = None) -> np.ndarray:
    t_end = config.t_max_ns if t_max is None else t_max
    return np.arange(0.0, t_end + 0.5 * config.dt_ns, config.dt_ns)


def _series_from_task(times: np.ndarray, result: dict, n_realizations: int) -> CorrelationSeries:
    return CorrelationSeries(
        times_ns=times,
        c_uu=result["c_uu"],
        c_ud=result["c_ud"],
        c_du=result["c_du"],
        c_dd=result["c_dd"],
        c11=result["c11"],
        stderr=result["stderr"],
        n_realizations=n_realizations,
    )


def _average_series(times: np.ndarray, results: list[dict]) -> CorrelationSeries:
    """Realization average; stderr is the across-realization standard deviation."""
    stack = {key: np.stack([r[key] for r in results]) for key in ("c_uu", "c_ud", "c_du", "c_dd", "c11")}
    n = len(results)
    stderr = stack["c11"].std(axis=0, ddof=1) if n > 1 else results[0]["stderr"]
    return CorrelationSeries(
        times_ns=times,
        c_uu=stack["c_uu"].mean(axis=0),
        c_ud=stack["c_ud"].mean(axis=0),
        c_du=stack["c_du"].mean(axis=0),
        c_dd=stack["c_dd"].mean(axis=0),
        c11=stack["c11"].mean(axis=0),
        stderr=stderr,
        n_realizations=n,
    )


# ----------------------------------------------------------------------
# scenarios


def _scenario_clean_diffusion(config, out_dir, outputs, task_seeds):
    spec = _make_spec(config)
    times = _time_grid(config)
    n_seeds = config.haar_seed_count(spec.n_sites)
    seeds = [derive_seed(config.seed, "haar-seed", i) for i in range(n_seeds)]
    task_seeds["haar"] = seeds
    payload = {
        "ladder": ladder_to_dict(spec),
        "potential": None,
        "times_ns": times.tolist(),
        "seeds": seeds,
        "t_r_ns": config.t_r_ns,
        "krylov_tol": config.krylov_tol,
        "krylov_mmax": config.krylov_mmax,
        "substep_ns": config.substep_ns,
    }
    result = _run_tasks(_correlation_task, [payload], config.threads)[0]
    series = _series_from_task(times, result, n_seeds)
    outputs.append(write_csv(out_dir / "series_clean.csv", SERIES_HEADER, series_rows(series)))
    fit = fit_power_law(series, config.fit_window_ns)
    outputs.append(write_json(out_dir / "fit_clean.json", fit_summary(fit)))
    if config.figures:
        outputs.append(
            report.render_correlation_figure(
                out_dir / "clean_diffusion.png",
                [series],
                [f"L={spec.L} clean"],
                fits=[fit],
                window_ns=config.fit_window_ns,
                title=f"clean ladder, alpha={fit.alpha:.3f}",
            )
        )


def _sweep_scenario(config, out_dir, outputs, task_seeds, kind: str):
    spec = _make_spec(config)
    n_seeds = config.haar_seed_count(spec.n_sites)
    values = config.w_mhz if kind == "disorder" else config.ws_mhz
    n_real = config.n_realizations if kind == "disorder" else 1

    payloads = []
    grid_for_value = {}
    for vi, value in enumerate(values):
        if kind == "stark":
            window = (
                config.fit_window_ns
                if value <= config.stark_window_split_mhz
                else config.fit_window_high_ns
            )
            times = _time_grid(config, t_max=max(config.t_max_ns, window[1]))
        else:
            times = _time_grid(config)
        grid_for_value[vi] = times
        for r in range(n_real):
            if kind == "disorder":
                disorder_seed = derive_seed(config.seed, "disorder", vi, r)
                potential = sample_disorder(value, spec.n_sites, disorder_seed).w.tolist()
                task_seeds[f"disorder_w{value:g}_r{r}"] = disorder_seed
            else:
                potential = tilt_potential(value, spec.L).w.tolist()
            seeds = [
                derive_seed(config.seed, "haar-seed", vi, r, i) for i in range(n_seeds)
            ]
            task_seeds[f"haar_{kind}{value:g}_r{r}"] = seeds
            payloads.append(
                {
                    "ladder": ladder_to_dict(spec),
                    "potential": potential,
                    "times_ns": times.tolist(),
                    "seeds": seeds,
                    "t_r_ns": config.t_r_ns,
                    "krylov_tol": config.krylov_tol,
                    "krylov_mmax": config.krylov_mmax,
                    "substep_ns": config.substep_ns,
                }
            )
    results = _run_tasks(_correlation_task, payloads, config.threads)

    axis_label = "w_mhz" if kind == "disorder" else "ws_mhz"
    summary_rows = []
    all_series, all_fits, labels = [], [], []
    for vi, value in enumerate(values):
        times = grid_for_value[vi]
        window = (
            config.fit_window_ns
            if kind == "disorder" or value <= config.stark_window_split_mhz
            else config.fit_window_high_ns
        )
        chunk = results[vi * n_real : (vi + 1) * n_real]
        series = _average_series(times, chunk) if n_real > 1 else _series_from_task(
            times, chunk[0], n_seeds
        )
        tag = f"{'w' if kind == 'disorder' else 'ws'}{value:g}"
        outputs.append(
            write_csv(out_dir / f"series_{tag}.csv", SERIES_HEADER, series_rows(series))
        )
        fit = fit_power_law(series, window)
        per_real_alphas = []
        if n_real > 1:
            for r_result in chunk:
                r_series = _series_from_task(times, r_result, n_seeds)
                per_real_alphas.append(fit_power_law(r_series, window).alpha)
        extra = {"n_realizations": n_real, axis_label: value}
        if per_real_alphas:
            extra["alpha_mean_realizations"] = float(np.mean(per_real_alphas))
            extra["alpha_std_realizations"] = float(np.std(per_real_alphas, ddof=1))
        outputs.append(write_json(out_dir / f"fit_{tag}.json", fit_summary(fit, extra)))
        alpha_mean = extra.get("alpha_mean_realizations", fit.alpha)
        alpha_err = extra.get("alpha_std_realizations", fit.alpha_stderr)
        summary_rows.append(
            (value, alpha_mean, alpha_err, fit.alpha, fit.alpha_stderr, window[0], window[1])
        )
        all_series.append(series)
        all_fits.append(fit)
        labels.append(f"{axis_label.split('_')[0].upper()}={value:g} MHz")
    summary_name = f"alpha_vs_{'w' if kind == 'disorder' else 'ws'}.csv"
    outputs.append(
        write_csv(
            out_dir / summary_name,
            [axis_label, "alpha", "alpha_err", "alpha_avg_series", "alpha_avg_series_stderr",
             "window_lo_ns", "window_hi_ns"],
            summary_rows,
        )
    )
    if config.figures:
        title = "disorder sweep" if kind == "disorder" else "tilted-ladder sweep"
        outputs.append(
            report.render_correlation_figure(
                out_dir / f"{kind}_series.png", all_series, labels, fits=all_fits, title=title
            )
        )
        arr = np.array(summary_rows, dtype=float)
        outputs.append(
            report.render_alpha_sweep_figure(
                out_dir / f"{kind}_alpha.png",
                arr[:, 0],
                arr[:, 1],
                arr[:, 2],
                xlabel=f"{'W' if kind == 'disorder' else 'W_S'}/2pi (MHz)",
                title=title,
            )
        )


def _scenario_haar_entropy(config, out_dir, outputs, task_seeds):
    spec = _make_spec(config)
    n_qubits = spec.n_sites
    tr_grid = config.tr_grid_ns or [0.0, 25.0, 50.0, 100.0, 150.0, 200.0]
    n_seeds = config.n_haar_seeds or 3
    cfg = KrylovConfig(
        m_max=config.krylov_mmax, step_ns=config.substep_ns, tol=config.krylov_tol
    )
    rows = []
    sampled_rows = []
    s_by_seed: dict[int, list[float]] = {}
    last_state = None
    for si in range(n_seeds):
        seed = derive_seed(config.seed, "haar-seed", si)
        task_seeds[f"haar_s{si}"] = seed
        for tr in tr_grid:
            psi = generate_haar_state(spec, seed=seed, t_r_ns=tr, cfg=cfg)
            rep = participation_entropy(psi, n_qubits=n_qubits)
            ks = porter_thomas_ks(np.abs(psi) ** 2)
            rows.append((tr, si, rep.s_pe, rep.s_target, ks))
            s_by_seed.setdefault(si, []).append(rep.s_pe)
            if config.n_shots > 0:
                sampled = sampled_participation_entropy(
                    psi, config.n_shots, seed=derive_seed(config.seed, "shots", si, int(tr))
                )
                sampled_rows.append(
                    (tr, si, sampled.s_pe, sampled.s_pe_miller_madow, sampled.n_samples)
                )
            if si == 0 and tr == tr_grid[-1]:
                last_state = psi
    outputs.append(
        write_csv(
            out_dir / "haar_entropy.csv",
            ["t_r_ns", "seed", "s_pe", "s_target", "ks"],
            rows,
        )
    )
    if sampled_rows:
        outputs.append(
            write_csv(
                out_dir / "haar_entropy_sampled.csv",
                ["t_r_ns", "seed", "s_pe_sampled", "s_pe_miller_madow", "n_shots"],
                sampled_rows,
            )
        )
    # rescaled-weight histogram of the final state for distribution checks
    p = np.abs(last_state) ** 2
    x = p.size * p
    edges = np.linspace(0.0, max(8.0, float(x.max())), 41)
    counts, _ = np.histogram(x, bins=edges)
    density = counts / (x.size * np.diff(edges))
    centers = 0.5 * (edges[:-1] + edges[1:])
    outputs.append(
        write_csv(
            out_dir / "weight_histogram.csv",
            ["dp_bin_center", "density", "ideal_density"],
            zip(centers, density, np.exp(-centers)),
        )
    )
    if config.figures:
        outputs.append(
            report.render_entropy_figure(
                out_dir / "haar_entropy.png",
                tr_grid,
                s_by_seed,
                haar_target_entropy(n_qubits),
                title=f"participation entropy, N={n_qubits}",
            )
        )
        outputs.append(
            report.render_histogram_figure(
                out_dir / "weight_histogram.png",
                centers,
                density,
                np.exp(-centers),
                title=f"rescaled weights, t_R={tr_grid[-1]:g} ns",
            )
        )


def _scenario_leakage_check(config, out_dir, outputs, task_seeds):
    spec3 = _make_spec(config, local_dim=3)
    spec2 = spec3.with_local_dim(2)
    occ = checkerboard_occupations(spec3.L)
    cfg = KrylovConfig(
        m_max=config.krylov_mmax, step_ns=config.substep_ns, tol=config.krylov_tol
    )
    times = _time_grid(config)
    h3 = build_bose_hubbard(spec3)
    h2 = build_interaction(spec2)
    leak = np.empty(times.size)
    frac = np.empty(times.size)
    dist = np.empty(times.size)
    hc_states = []

    def observe_hc(i, _t, psi):
        hc_states.append(psi.copy())

    evolve_observed(h2, basis_state(spec2.n_sites, occ), times, observe_hc, cfg)

    def observe(i, _t, psi):
        leak[i] = leakage_probability(psi, spec3)
        frac[i] = particle_number(psi, local_dim=3) / spec3.n_sites
        projected = project_to_hardcore(psi, spec3.n_sites)
        overlap = np.vdot(hc_states[i], projected)
        phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
        dist[i] = np.linalg.norm(projected / np.linalg.norm(projected) - phase * hc_states[i])

    evolve_observed(h3, basis_state(spec3.n_sites, occ, local_dim=3), times, observe, cfg)
    outputs.append(
        write_csv(
            out_dir / "leakage.csv",
            ["time_ns", "leakage_prob", "n_over_2l", "hardcore_distance"],
            zip(times, leak, frac, dist),
        )
    )
    if config.figures:
        outputs.append(
            report.render_timeseries_figure(
                out_dir / "leakage.png",
                times,
                {"leakage": leak, "n/2L": frac},
                ylabel="probability / filling",
                title=f"occupation leakage, L={spec3.L}",
            )
        )


def _scenario_decoherence_check(config, out_dir, outputs, task_seeds):
    spec = _make_spec(config)
    relax = RelaxationSpec.uniform(spec.n_sites, config.t1_ns)
    H = build_interaction(spec)
    occ = checkerboard_occupations(spec.L)
    times = _time_grid(config)
    traj_seed = derive_seed(config.seed, "trajectories")
    task_seeds["trajectories"] = traj_seed
    res = evolve_trajectories(
        H,
        relax,
        basis_state(spec.n_sites, occ),
        times,
        n_traj=config.n_traj,
        seed=traj_seed,
    )
    frac = res.means["n"] / spec.n_sites
    frac_err = res.stderrs["n"] / spec.n_sites
    header = ["time_ns", "n_over_2l", "stderr"]
    columns = [times, frac, frac_err]
    if config.decoherence_c11:
        c11_u, c11_l, c11_err = _c11_with_relaxation(config, spec, H, relax, times, task_seeds)
        header += ["c11_unitary", "c11_lindblad", "c11_lindblad_stderr"]
        columns += [c11_u, c11_l, c11_err]
    outputs.append(write_csv(out_dir / "decoherence.csv", header, zip(*columns)))
    if config.figures:
        outputs.append(
            report.render_timeseries_figure(
                out_dir / "decoherence.png",
                times,
                {"n/2L (trajectories)": frac},
                errorbars={"n/2L (trajectories)": frac_err},
                ylabel="filling fraction",
                title=f"relaxation, T1={config.t1_ns:g} ns, {config.n_traj} trajectories",
            )
        )


def _c11_with_relaxation(config, spec, H, relax, times, task_seeds):
    """C_11 via the typicality circuit with and without relaxation.

    The same Haar state feeds both routes so typicality error cancels in
    the difference.
    """
    cfg = KrylovConfig(
        m_max=config.krylov_mmax, step_ns=config.substep_ns, tol=config.krylov_tol
    )
    comp_u = np.empty((2, 2, times.size))
    comp_l = np.empty((2, 2, times.size))
    comp_err = np.empty((2, 2, times.size))
    for nu in (0, 1):
        haar_seed = derive_seed(config.seed, "c11-haar", nu)
        task_seeds[f"c11_haar_nu{nu}"] = haar_seed
        psi0 = generate_haar_state(spec, seed=haar_seed, exclude=nu, cfg=cfg, t_r_ns=config.t_r_ns)

        sz_u = np.empty((2, times.size))

        def observe(i, _t, psi):
            sz_u[0, i] = sz_site(psi, 0)
            sz_u[1, i] = sz_site(psi, 1)

        evolve_observed(H, psi0, times, observe, cfg)
        comp_u[:, nu, :] = sz_u

        traj_seed = derive_seed(config.seed, "c11-traj", nu)
        task_seeds[f"c11_traj_nu{nu}"] = traj_seed
        res = evolve_trajectories(
            H,
            relax,
            psi0,
            times,
            n_traj=config.n_traj,
            seed=traj_seed,
            observables={"sz0": lambda s: sz_site(s, 0), "sz1": lambda s: sz_site(s, 1)},
        )
        comp_l[0, nu, :] = res.means["sz0"]
        comp_l[1, nu, :] = res.means["sz1"]
        comp_err[0, nu, :] = res.stderrs["sz0"]
        comp_err[1, nu, :] = res.stderrs["sz1"]
    c11_u = comp_u.mean(axis=(0, 1))
    c11_l = comp_l.mean(axis=(0, 1))
    c11_err = 0.25 * np.sqrt((comp_err**2).sum(axis=(0, 1)))
    return c11_u, c11_l, c11_err


def _scenario_product_state_study(config, out_dir, outputs, task_seeds):
    spec = _make_spec(config)
    field = tilt_potential(config.product_ws_mhz, spec.L)
    cfg = KrylovConfig(
        m_max=config.krylov_mmax, step_ns=config.substep_ns, tol=config.krylov_tol
    )
    times = _time_grid(config)
    curves = {}
    for name, pattern in _half_state_patterns(spec.L).items():
        occ = leg_pattern_occupations(pattern)
        n_dw = domain_wall_count(occ)
        series = product_state_autocorrelation(spec, field, occ, times, cfg)
        curves[f"c_{name}_ndw{n_dw}"] = series.values
    outputs.append(
        write_csv(
            out_dir / "product_state.csv",
            ["time_ns", *curves.keys()],
            zip(times, *curves.values()),
        )
    )
    if config.figures:
        outputs.append(
            report.render_timeseries_figure(
                out_dir / "product_state.png",
                times,
                curves,
                ylabel=r"$C_{1,1}(|\psi_0\rangle)$",
                title=f"product-state correlators, W_S={config.product_ws_mhz:g} MHz tilt",
            )
        )


def _scenario_calib_demo(config, out_dir, outputs, task_seeds):
    rng_seed = derive_seed(config.seed, "calib")
    task_seeds["calib"] = rng_seed
    rng = np.random.Generator(np.random.PCG64(rng_seed))

    # Rabi scan: 10 MHz drive with 30 us decay, 1% additive noise
    truth = RabiFit(omega_mhz=10.0, t1_ns=30000.0, amplitude=-0.5, offset=0.5)
    t = np.linspace(0.0, 1000.0, 251)
    clean = truth.amplitude * np.exp(-t / truth.t1_ns) * np.cos(
        TWO_PI_MHZ * truth.omega_mhz * t
    ) + truth.offset
    scan = clean + rng.normal(0.0, 0.01, t.size)
    fit = fit_rabi(t, scan)
    outputs.append(write_csv(out_dir / "rabi_scan.csv", ["t_ns", "p1"], zip(t, scan)))
    outputs.append(
        write_json(
            out_dir / "rabi_fit.json",
            {
                "omega_mhz": fit.omega_mhz,
                "t1_ns": fit.t1_ns,
                "amplitude": fit.amplitude,
                "offset": fit.offset,
                "true_omega_mhz": truth.omega_mhz,
                "relative_omega_error": abs(fit.omega_mhz - truth.omega_mhz) / truth.omega_mhz,
            },
        )
    )

    # crosstalk phase scan at the few-percent coupling scale
    c_true, phi_true = 0.05, 0.7
    omega_i, omega_j = 10.0, 9.0
    phi_scan = np.linspace(-math.pi, math.pi, 41)
    omega_r = np.array(
        [effective_rabi(0.0, omega_i, c_true * omega_j, phi_true, p) for p in phi_scan]
    )
    omega_r_noisy = omega_r * (1.0 + rng.normal(0.0, 0.002, omega_r.size))
    xfit = extract_crosstalk(phi_scan, omega_r_noisy, 0.0, omega_i, omega_j)
    outputs.append(
        write_csv(
            out_dir / "crosstalk_scan.csv",
            ["phi_ii_rad", "omega_r_mhz"],
            zip(phi_scan, omega_r_noisy),
        )
    )
    outputs.append(
        write_json(
            out_dir / "crosstalk_fit.json",
            {
                "c_ij": xfit.c_ij,
                "phi_ij": xfit.phi_ij,
                "identifiable": xfit.identifiable,
                "true_c_ij": c_true,
                "true_phi_ij": phi_true,
            },
        )
    )

    # mixer map round-trip and crosstalk precompensation residual
    mixer = MixerMap(eta=12.0, v_sat=0.6, omega_max=18.0)
    v = np.linspace(0.0, 3.0, 301)
    omega = amp_to_rabi(v, mixer)
    outputs.append(
        write_csv(out_dir / "mixer_map.csv", ["v_iq", "omega_mhz"], zip(v, omega))
    )
    roundtrip = float(np.max(np.abs(rabi_to_amp(omega[:-1], mixer) - v[:-1])))
    n_chan = 4
    c_mag = np.abs(rng.normal(0.0, 0.02, (n_chan, n_chan)))
    phases = rng.uniform(-math.pi, math.pi, (n_chan, n_chan))
    m_omega = CrosstalkMatrix.from_coefficients(c_mag, phases)
    eta = rng.uniform(9.0, 14.0, n_chan)
    desired = rng.normal(size=n_chan) + 1j * rng.normal(size=n_chan)
    corrected = correct_crosstalk(m_omega, eta, desired)
    residual = float(np.max(np.abs(apply_crosstalk(m_omega, eta, corrected) - desired)))
    outputs.append(
        write_json(
            out_dir / "calib_summary.json",
            {
                "mixer_roundtrip_max_error": roundtrip,
                "crosstalk_correction_residual": residual,
                "crosstalk_condition_number": float(
                    np.linalg.cond(
                        (eta[:, None] * m_omega.values) / eta[None, :]
                    )
                ),
            },
        )
    )
    if config.figures:
        model_curve = fit.amplitude * np.exp(-t / fit.t1_ns) * np.cos(
            TWO_PI_MHZ * fit.omega_mhz * t
        ) + fit.offset
        outputs.append(
            report.render_rabi_fit_figure(
                out_dir / "rabi_fit.png", t, scan, model_curve,
                title=f"Rabi fit: {fit.omega_mhz:.3f} MHz",
            )
        )
        model_scan = np.array(
            [
                effective_rabi(0.0, omega_i, xfit.c_ij * omega_j, xfit.phi_ij, p)
                for p in phi_scan
            ]
        )
        outputs.append(
            report.render_crosstalk_scan_figure(
                out_dir / "crosstalk_fit.png", phi_scan, omega_r_noisy, model_scan,
                title=f"crosstalk: c={xfit.c_ij:.4f}, phi={xfit.phi_ij:.3f}",
            )
        )


_SCENARIO_FNS = {
    "clean-diffusion": _scenario_clean_diffusion,
    "haar-entropy": _scenario_haar_entropy,
    "leakage-check": _scenario_leakage_check,
    "decoherence-check": _scenario_decoherence_check,
    "product-state-study": _scenario_product_state_study,
    "calib-demo": _scenario_calib_demo,
}


def run(config: ExperimentConfig) -> RunManifest:
    """Execute a scenario and write its outputs plus a manifest.

    On task failure the manifest is still written with
    ``status = "failed"`` listing whatever completed, then the error is
    re-raised.
    """
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs: list[Path] = []
    task_seeds: dict = {}
    start = time.perf_counter()
    status = "complete"
    try:
        if config.scenario == "disorder-sweep":
            _sweep_scenario(config, out_dir, outputs, task_seeds, kind="disorder")
        elif config.scenario == "stark-sweep":
            _sweep_scenario(config, out_dir, outputs, task_seeds, kind="stark")
        else:
            _SCENARIO_FNS[config.scenario](config, out_dir, outputs, task_seeds)
    except Exception:
        status = "failed"
        raise
    finally:
        wall = time.perf_counter() - start
        manifest = RunManifest(
            scenario=config.scenario,
            software_version=software_version,
            config=config.to_dict(),
            task_seeds=task_seeds,
            outputs={p.name: sha256_file(p) for p in outputs},
            wall_time_s=wall,
            status=status,
        )
        (out_dir / "manifest.json").write_text(manifest.to_json() + "\n")
    return manifest


def rerun_verify(manifest_path: str | Path, work_dir: str | Path) -> dict:
    """Re-run a manifest's config into ``work_dir`` and compare checksums.

    Returns a report dict with any mismatching output names; an empty
    ``mismatches`` list means the run is bit-reproducible.
    """
    from .config import config_from_dict

    manifest = json.loads(Path(manifest_path).read_text())
    conf_dict = {k: v for k, v in manifest["config"].items() if v is not None}
    conf_dict["out_dir"] = str(work_dir)
    config = config_from_dict(conf_dict)
    fresh = run(config)
    mismatches = [
        name
        for name, digest in manifest["outputs"].items()
        if fresh.outputs.get(name) != digest
    ]
    return {
        "checked": len(manifest["outputs"]),
        "mismatches": mismatches,
        "reproducible": not mismatches,
    }
