"""Command-line entry point.

Four workflows:

* ``exact``: exact quantum trajectory of a few sampled or listed atoms
* ``cloud``: superatom partition of a Gaussian cloud plus its curve
* ``scaling``: (density, drive) sweep with saturation fits and exponents
* ``fit``: saturation fit of an existing curve CSV

Each run writes its CSVs plus a ``manifest.txt`` into the output
directory (--out, else $BLOCKADESIM_OUT, else the working directory).
The manifest records digests of every file and the fully resolved
configuration; feeding it back through --config reruns the workflow and,
for the deterministic paths, reproduces the CSVs byte for byte.

Exit codes: 0 success, 2 bad input or configuration, 3 a fit failed to
converge, 4 a resource cap was exceeded.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from . import __version__
from .cloud import partition_superatoms, sample_positions
from .config import (
    RunConfig,
    config_items,
    load_config,
    resolve_cloud,
    resolve_params,
    resolve_time_grid,
)
from .core import angular_from_hz, blockade_radius_simple
from .errors import (
    BasisMismatchError,
    BlockadeSimError,
    ConfigError,
    DegenerateDataError,
    DomainError,
    GeometryError,
    InputFileError,
    InvalidParameterError,
    RankDeficiencyError,
    SizeCapError,
)
from .exact import (
    AtomPositions,
    HamiltonianSpec,
    build_hamiltonian,
    evolve,
    full_basis,
    ground_state,
    restricted_basis,
    rydberg_number,
    w_state_fidelity,
)
from .analysis import fit_saturation, scaling_experiment
from .runio import (
    format_float,
    read_curve_csv,
    sha256_file,
    write_curve_csv,
    write_ensemble_csv,
    write_exponents_csv,
    write_fit_csv,
    write_manifest,
    write_sweep_csv,
    write_trajectory_csv,
)
from .superatom import simulate_cloud

OUT_ENV_VAR = "BLOCKADESIM_OUT"

_INPUT_ERRORS = (
    ConfigError,
    InputFileError,
    InvalidParameterError,
    GeometryError,
    DomainError,
    RankDeficiencyError,
    DegenerateDataError,
    BasisMismatchError,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blockadesim",
        description="Simulate and analyze collective excitation of blockaded atom clouds.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, needs_config: bool) -> None:
        if needs_config:
            p.add_argument("--config", required=True, help="key = value run configuration")
        p.add_argument(
            "--out",
            default=None,
            help=f"output directory (default ${OUT_ENV_VAR} or the working directory)",
        )
        p.add_argument("--seed", type=int, default=None, help="override run.seed")
        p.add_argument(
            "--model",
            choices=("simple", "collective"),
            default=None,
            help="override partition.model",
        )
        p.add_argument("--threads", type=int, default=None, help="override run.threads")

    add_common(sub.add_parser("exact", help="exact few-atom quantum trajectory"), True)
    add_common(sub.add_parser("cloud", help="partition a cloud and simulate its curve"), True)
    add_common(sub.add_parser("scaling", help="sweep density and drive, fit exponents"), True)
    fit = sub.add_parser("fit", help="fit the saturation law to a curve CSV")
    fit.add_argument("curve", help="CSV with header t_s,n_rydberg")
    add_common(fit, False)
    return parser


def _output_dir(args: argparse.Namespace) -> str:
    out = args.out or os.environ.get(OUT_ENV_VAR) or "."
    os.makedirs(out, exist_ok=True)
    return out


def _load_config_with_overrides(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.model is not None:
        cfg.model = args.model
    if args.threads is not None:
        cfg.threads = args.threads
    return cfg


def _finish_manifest(out, command, cfg, inputs, written) -> None:
    outputs = [
        (name, filename, sha256_file(os.path.join(out, filename)))
        for name, filename in written
    ]
    items = config_items(cfg) if cfg is not None else []
    write_manifest(
        os.path.join(out, "manifest.txt"),
        command=command,
        version=__version__,
        config_items=items,
        inputs=inputs,
        outputs=outputs,
    )


def _cmd_exact(args: argparse.Namespace) -> int:
    cfg = _load_config_with_overrides(args)
    out = _output_dir(args)
    params = resolve_params(cfg)
    inputs = []
    if cfg.positions_path is not None:
        positions = AtomPositions.from_text(cfg.positions_path)
        inputs.append(("positions", cfg.positions_path, sha256_file(cfg.positions_path)))
    else:
        if cfg.exact_n_atoms is None:
            raise ConfigError("exact needs exact.n_atoms or exact.positions_path")
        cloud = resolve_cloud(cfg)
        positions = sample_positions(cloud, cfg.exact_n_atoms, cfg.seed)
    if cfg.basis == "full":
        basis = full_basis(len(positions), cfg.max_atoms_full)
    else:
        radius = cfg.restriction_radius_m
        if radius is None:
            radius = blockade_radius_simple(params)
        basis = restricted_basis(positions, radius, cfg.max_atoms_restricted)
    spec = HamiltonianSpec(
        positions, params.omega0, params.c6, angular_from_hz(cfg.detuning_hz)
    )
    hamiltonian = build_hamiltonian(spec, basis)
    grid = resolve_time_grid(cfg)
    states = evolve(hamiltonian, ground_state(basis), grid)
    n_ryd = [rydberg_number(s) for s in states]
    w_fid = [w_state_fidelity(s) for s in states]
    write_trajectory_csv(os.path.join(out, "trajectory.csv"), grid, n_ryd, w_fid)
    _finish_manifest(out, "exact", cfg, inputs, [("trajectory", "trajectory.csv")])
    print(
        f"exact: {len(positions)} atoms, {basis.n_states} basis states "
        f"({basis.kind}), {grid.size} times -> {out}/trajectory.csv"
    )
    return 0


def _cmd_cloud(args: argparse.Namespace) -> int:
    cfg = _load_config_with_overrides(args)
    out = _output_dir(args)
    params = resolve_params(cfg)
    cloud = resolve_cloud(cfg)
    grid = resolve_time_grid(cfg)
    ensemble = partition_superatoms(
        cloud,
        params,
        model=cfg.model,
        n_min=cfg.n_min,
        span_sigmas=cfg.span_sigmas,
        cell_cap=cfg.cell_cap,
    )
    curve = simulate_cloud(ensemble, params, grid)
    write_ensemble_csv(os.path.join(out, "ensemble.csv"), ensemble)
    write_curve_csv(os.path.join(out, "curve.csv"), curve)
    _finish_manifest(
        out, "cloud", cfg, [],
        [("ensemble", "ensemble.csv"), ("curve", "curve.csv")],
    )
    print(
        f"cloud: {len(ensemble)} superatom entries covering "
        f"{format_float(ensemble.total_atoms_covered)} of "
        f"{format_float(cloud.n_atoms)} atoms ({cfg.model}) -> {out}/curve.csv"
    )
    return 0


def _cmd_scaling(args: argparse.Namespace) -> int:
    cfg = _load_config_with_overrides(args)
    out = _output_dir(args)
    if not cfg.sweep_densities_m3 or not cfg.sweep_omega0_hz:
        raise ConfigError("scaling needs sweep.densities_m3 and sweep.omega0_hz")
    sigma = (cfg.sigma_x_m, cfg.sigma_y_m, cfg.sigma_z_m)
    if any(s is None for s in sigma):
        raise ConfigError("scaling needs cloud.sigma_x_m, sigma_y_m and sigma_z_m")
    if cfg.omega0_hz is None and cfg.omega1_hz is None:
        cfg.omega0_hz = cfg.sweep_omega0_hz[0]
    params = resolve_params(cfg)
    grid = resolve_time_grid(cfg)
    omega_grid = [angular_from_hz(f) for f in cfg.sweep_omega0_hz]
    result = scaling_experiment(
        sigma,
        cfg.sweep_densities_m3,
        omega_grid,
        params,
        grid,
        model=cfg.model,
        n_min=cfg.n_min,
        span_sigmas=cfg.span_sigmas,
        cell_cap=cfg.cell_cap,
        threads=cfg.threads,
    )
    write_sweep_csv(os.path.join(out, "sweep.csv"), result.points)
    write_exponents_csv(os.path.join(out, "exponents.csv"), result.exponents)
    _finish_manifest(
        out, "scaling", cfg, [],
        [("sweep", "sweep.csv"), ("exponents", "exponents.csv")],
    )
    for name in ("a", "b", "c", "d"):
        e = result.exponents[name]
        if math.isnan(e.value):
            print(f"warning: exponent {name} not identifiable (single-valued grid axis)")
        else:
            print(f"{name} = {e.value:+.4f} +/- {e.std_error:.4f} (n={e.n_points})")
    if result.n_excluded:
        print(
            f"warning: {result.n_excluded} of {len(result.points)} fits did not "
            "converge and were excluded",
            file=sys.stderr,
        )
        return 3
    return 0


def _cmd_fit(args: argparse.Namespace) -> int:
    out = _output_dir(args)
    curve = read_curve_csv(args.curve)
    fit = fit_saturation(curve)
    write_fit_csv(os.path.join(out, "fit.csv"), fit)
    _finish_manifest(
        out, "fit", None,
        [("curve", args.curve, sha256_file(args.curve))],
        [("fit", "fit.csv")],
    )
    print(f"n_sat = {format_float(fit.n_sat)} +/- {format_float(fit.n_sat_err)}")
    print(f"R     = {format_float(fit.rate)} +/- {format_float(fit.rate_err)} 1/s")
    print(
        f"residual_rms = {format_float(fit.residual_rms)}, "
        f"converged = {fit.converged} after {fit.n_iterations} iterations"
    )
    if not fit.converged:
        print("warning: fit did not converge; values are the best iterate", file=sys.stderr)
        return 3
    return 0


_COMMANDS = {
    "exact": _cmd_exact,
    "cloud": _cmd_cloud,
    "scaling": _cmd_scaling,
    "fit": _cmd_fit,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except SizeCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BlockadeSimError as exc:  # anything else we raised on purpose
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
