"""Command-line interface.

``spinflow run <config.toml>`` executes a named scenario; the remaining
subcommands are direct entry points into the analysis pieces (Haar
certification, power-law fitting, calibration fits) for data that is
already on disk.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, config_from_dict, load_config
from .scenarios import rerun_verify, run, write_json


def _add_common_numeric_flags(parser):
    parser.add_argument("--krylov-tol", type=float, default=None, help="Krylov residual tolerance")
    parser.add_argument("--krylov-mmax", type=int, default=None, help="max Krylov dimension")
    parser.add_argument("--substep-ns", type=float, default=None, help="Krylov substep (ns)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinflow",
        description="spin transport on a two-leg qubit ladder: scenarios, fits, calibration",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario described by a TOML config")
    p_run.add_argument("config", type=Path, help="path to the experiment config")
    p_run.add_argument("--out-dir", type=Path, default=None, help="override the output directory")
    p_run.add_argument("--seed", type=int, default=None, help="override the root seed")
    p_run.add_argument("--threads", type=int, default=None, help="worker processes for sweeps")
    p_run.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    _add_common_numeric_flags(p_run)

    p_haar = sub.add_parser("haar-entropy", help="participation-entropy certification run")
    p_haar.add_argument("--n", type=int, required=True, help="number of driven qubits")
    p_haar.add_argument("--tr", type=float, default=200.0, help="drive duration t_R (ns)")
    p_haar.add_argument("--tr-grid", type=str, default=None,
                        help="comma-separated t_R list (overrides --tr)")
    p_haar.add_argument("--seeds", type=int, default=3, help="number of drive-parameter draws")
    p_haar.add_argument("--shots", type=int, default=0,
                        help="also report sampled entropy with this many shots")
    p_haar.add_argument("--seed", type=int, default=1, help="root seed")
    p_haar.add_argument("--preset", default="device", help="ladder preset")
    p_haar.add_argument("--out-dir", type=Path, default=Path("runs/haar-entropy"))
    p_haar.add_argument("--no-figures", action="store_true")
    _add_common_numeric_flags(p_haar)

    p_fit = sub.add_parser("fit", help="power-law fit of a correlation CSV")
    p_fit.add_argument("--input", type=Path, required=True, help="CSV with time_ns and c11")
    p_fit.add_argument("--window", type=str, required=True, help="fit window, e.g. 50:200")
    p_fit.add_argument("--output", type=Path, default=None, help="write JSON here (default stdout)")

    p_calib = sub.add_parser("calib", help="calibration fits on scan CSVs")
    calib_sub = p_calib.add_subparsers(dest="calib_command", required=True)

    p_rabi = calib_sub.add_parser("rabi-fit", help="fit a decaying Rabi oscillation scan")
    p_rabi.add_argument("--input", type=Path, required=True, help="CSV with t_ns and p1")
    p_rabi.add_argument("--output", type=Path, default=None)

    p_xt = calib_sub.add_parser("crosstalk", help="extract a crosstalk coefficient from a phase scan")
    p_xt.add_argument("--input", type=Path, required=True, help="CSV with phi_ii_rad and omega_r_mhz")
    p_xt.add_argument("--delta", type=float, default=0.0, help="detuning (MHz)")
    p_xt.add_argument("--omega-i", type=float, required=True, help="direct drive amplitude (MHz)")
    p_xt.add_argument("--omega-j", type=float, required=True, help="neighbor drive amplitude (MHz)")
    p_xt.add_argument("--output", type=Path, default=None)

    p_verify = sub.add_parser(
        "rerun-verify", help="re-run a manifest's config and compare output checksums"
    )
    p_verify.add_argument("manifest", type=Path)
    p_verify.add_argument("--work-dir", type=Path, required=True,
                          help="scratch directory for the verification run")
    return parser


def _read_csv_columns(path: Path, required: list[str]) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    if not rows:
        raise SystemExit(f"{path}: empty CSV")
    missing = [c for c in required if c not in rows[0]]
    if missing:
        raise SystemExit(f"{path}: missing columns {missing}")
    return {
        c: np.array([float(row[c]) for row in rows])
        for c in rows[0]
        if all(_is_float(row[c]) for row in rows)
    }


def _is_float(text: str) -> bool:
    try:
        float(text)
        return True
    except (TypeError, ValueError):
        return False


def _emit(payload: dict, output: Path | None):
    if output is None:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        write_json(output, payload)
        print(f"wrote {output}")


def _apply_overrides(conf_dict: dict, args) -> dict:
    if getattr(args, "out_dir", None) is not None:
        conf_dict["out_dir"] = str(args.out_dir)
    if getattr(args, "seed", None) is not None:
        conf_dict["seed"] = args.seed
    if getattr(args, "threads", None) is not None:
        conf_dict["threads"] = args.threads
    if getattr(args, "no_figures", False):
        conf_dict["figures"] = False
    if getattr(args, "krylov_tol", None) is not None:
        conf_dict["krylov_tol"] = args.krylov_tol
    if getattr(args, "krylov_mmax", None) is not None:
        conf_dict["krylov_mmax"] = args.krylov_mmax
    if getattr(args, "substep_ns", None) is not None:
        conf_dict["substep_ns"] = args.substep_ns
    return conf_dict


def _cmd_run(args) -> int:
    config = load_config(args.config)
    conf_dict = {k: v for k, v in config.to_dict().items() if v is not None}
    config = config_from_dict(_apply_overrides(conf_dict, args))
    manifest = run(config)
    print(f"{config.scenario}: {len(manifest.outputs)} outputs in {config.out_dir} "
          f"({manifest.wall_time_s:.1f} s)")
    return 0


def _cmd_haar_entropy(args) -> int:
    if args.n % 2:
        raise SystemExit("--n must be even (two legs); odd registers arise only "
                         "inside transport runs where one site is detached")
    if args.tr_grid:
        grid = [float(x) for x in args.tr_grid.split(",")]
    else:
        grid = [args.tr]
    conf_dict = {
        "scenario": "haar-entropy",
        "seed": args.seed,
        "out_dir": str(args.out_dir),
        "ladder_preset": args.preset,
        "L": args.n // 2,
        "tr_grid_ns": grid,
        "n_haar_seeds": args.seeds,
        "n_shots": args.shots,
    }
    config = config_from_dict(_apply_overrides(conf_dict, args))
    manifest = run(config)
    print(f"haar-entropy: {len(manifest.outputs)} outputs in {config.out_dir}")
    return 0


def _cmd_fit(args) -> int:
    try:
        lo, hi = (float(x) for x in args.window.split(":"))
    except ValueError:
        raise SystemExit("--window must look like 50:200")
    cols = _read_csv_columns(args.input, ["time_ns", "c11"])
    stderr = cols.get("c11_stderr")
    from .transport import classify_transport, fit_power_law

    fit = fit_power_law((cols["time_ns"], cols["c11"], stderr), (lo, hi))
    _emit(
        {
            "alpha": fit.alpha,
            "alpha_stderr": fit.alpha_stderr,
            "window_lo_ns": lo,
            "window_hi_ns": hi,
            "r_squared": fit.r_squared,
            "n_points": fit.n_points,
            "classification": classify_transport(fit),
        },
        args.output,
    )
    return 0


def _cmd_calib_rabi(args) -> int:
    cols = _read_csv_columns(args.input, ["t_ns", "p1"])
    from .calib import fit_rabi

    fit = fit_rabi(cols["t_ns"], cols["p1"])
    _emit(
        {
            "omega_mhz": fit.omega_mhz,
            "t1_ns": fit.t1_ns if np.isfinite(fit.t1_ns) else None,
            "amplitude": fit.amplitude,
            "offset": fit.offset,
        },
        args.output,
    )
    return 0


def _cmd_calib_crosstalk(args) -> int:
    cols = _read_csv_columns(args.input, ["phi_ii_rad", "omega_r_mhz"])
    from .calib import extract_crosstalk

    fit = extract_crosstalk(
        cols["phi_ii_rad"], cols["omega_r_mhz"], args.delta, args.omega_i, args.omega_j
    )
    _emit(
        {"c_ij": fit.c_ij, "phi_ij": fit.phi_ij, "identifiable": fit.identifiable},
        args.output,
    )
    return 0


def _cmd_rerun_verify(args) -> int:
    result = rerun_verify(args.manifest, args.work_dir)
    print(json.dumps(result, indent=2, sort_keys=True))
    return 0 if result["reproducible"] else 1


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "haar-entropy":
            return _cmd_haar_entropy(args)
        if args.command == "fit":
            return _cmd_fit(args)
        if args.command == "calib":
            if args.calib_command == "rabi-fit":
                return _cmd_calib_rabi(args)
            return _cmd_calib_crosstalk(args)
        if args.command == "rerun-verify":
            return _cmd_rerun_verify(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
