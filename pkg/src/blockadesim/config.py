"""Run configuration: flat ``key = value`` files.

One assignment per line, ``#`` starts a full-line comment, keys are
dotted lowercase. Unknown keys are rejected by name so typos fail fast.
Manifests written by the CLI parse as configs too: ``manifest.*`` keys
are ignored and a leading ``config.`` prefix is stripped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cloud import DEFAULT_CELL_CAP, CloudSpec
from .core import PhysicalParams, TwoPhotonDrive, convert_c6_atomic_units, two_photon_rabi
from .errors import ConfigError

__all__ = ["RunConfig", "load_config", "parse_config_text", "config_items"]


@dataclass
class RunConfig:
    """All recognized keys with their defaults; None means unset."""

    omega0_hz: float | None = None
    omega1_hz: float | None = None
    omega2_hz: float | None = None
    delta_hz: float | None = None
    c6_au: float | None = None
    c6_jm6: float | None = None
    gamma_per_s: float = 0.0
    kappa: float = 1.0
    detuning_hz: float = 0.0
    cloud_n_atoms: float | None = None
    peak_density_m3: float | None = None
    sigma_x_m: float | None = None
    sigma_y_m: float | None = None
    sigma_z_m: float | None = None
    model: str = "collective"
    n_min: float = 1.0
    span_sigmas: float = 5.0
    cell_cap: int = DEFAULT_CELL_CAP
    time_stop_s: float | None = None
    time_start_s: float | None = None
    time_num: int = 200
    time_spacing: str = "linear"
    exact_n_atoms: int | None = None
    positions_path: str | None = None
    basis: str = "full"
    restriction_radius_m: float | None = None
    max_atoms_full: int = 14
    max_atoms_restricted: int = 24
    sweep_densities_m3: tuple[float, ...] | None = None
    sweep_omega0_hz: tuple[float, ...] | None = None
    seed: int = 0
    threads: int = 1


# dotted config key -> (RunConfig attribute, value kind)
_KEYS: dict[str, tuple[str, str]] = {
    "physical.omega0_hz": ("omega0_hz", "float"),
    "physical.omega1_hz": ("omega1_hz", "float"),
    "physical.omega2_hz": ("omega2_hz", "float"),
    "physical.delta_hz": ("delta_hz", "float"),
    "physical.c6_au": ("c6_au", "float"),
    "physical.c6_jm6": ("c6_jm6", "float"),
    "physical.gamma_per_s": ("gamma_per_s", "float"),
    "physical.kappa": ("kappa", "float"),
    "physical.detuning_hz": ("detuning_hz", "float"),
    "cloud.n_atoms": ("cloud_n_atoms", "float"),
    "cloud.peak_density_m3": ("peak_density_m3", "float"),
    "cloud.sigma_x_m": ("sigma_x_m", "float"),
    "cloud.sigma_y_m": ("sigma_y_m", "float"),
    "cloud.sigma_z_m": ("sigma_z_m", "float"),
    "partition.model": ("model", "str"),
    "partition.n_min": ("n_min", "float"),
    "partition.span_sigmas": ("span_sigmas", "float"),
    "partition.cell_cap": ("cell_cap", "int"),
    "time.stop_s": ("time_stop_s", "float"),
    "time.start_s": ("time_start_s", "float"),
    "time.num": ("time_num", "int"),
    "time.spacing": ("time_spacing", "str"),
    "exact.n_atoms": ("exact_n_atoms", "int"),
    "exact.positions_path": ("positions_path", "str"),
    "exact.basis": ("basis", "str"),
    "exact.restriction_radius_m": ("restriction_radius_m", "float"),
    "exact.max_atoms_full": ("max_atoms_full", "int"),
    "exact.max_atoms_restricted": ("max_atoms_restricted", "int"),
    "sweep.densities_m3": ("sweep_densities_m3", "floats"),
    "sweep.omega0_hz": ("sweep_omega0_hz", "floats"),
    "run.seed": ("seed", "int"),
    "run.threads": ("threads", "int"),
}

_CHOICES = {
    "partition.model": ("simple", "collective"),
    "time.spacing": ("linear", "log"),
    "exact.basis": ("full", "restricted"),
}


def _parse_value(key: str, kind: str, text: str):
    try:
        if kind == "float":
            return float(text)
        if kind == "int":
            return int(text)
        if kind == "floats":
            parts = [p.strip() for p in text.split(",") if p.strip()]
            if not parts:
                raise ValueError("empty list")
            return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from exc
    choices = _CHOICES.get(key)
    if choices and text not in choices:
        raise ConfigError(f"bad value for {key}: expected one of {choices}, got {text!r}")
    return text


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    seen: dict[str, int] = {}
    cfg = RunConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}, line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key.startswith("manifest."):
            continue
        if key.startswith("config."):
            key = key[len("config.") :]
        if key not in _KEYS:
            raise ConfigError(f"{source}, line {lineno}: unknown configuration key {key!r}")
        if key in seen:
            raise ConfigError(
                f"{source}, line {lineno}: duplicate key {key!r} (first on line {seen[key]})"
            )
        seen[key] = lineno
        attr, kind = _KEYS[key]
        setattr(cfg, attr, _parse_value(key, kind, value))
    return cfg


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc
    return parse_config_text(text, source=path)


def config_items(cfg: RunConfig) -> list[tuple[str, str]]:
    """Dump the resolved configuration as (dotted key, string) pairs.

    Unset optional keys are omitted; everything else round-trips through
    parse_config_text bit-exactly (floats via repr).
    """
    items = []
    for key, (attr, kind) in _KEYS.items():
        value = getattr(cfg, attr)
        if value is None:
            continue
        if kind == "float":
            text = repr(float(value))
        elif kind == "int":
            text = str(int(value))
        elif kind == "floats":
            text = ",".join(repr(float(v)) for v in value)
        else:
            text = str(value)
        items.append((key, text))
    return items


def resolve_params(cfg: RunConfig) -> PhysicalParams:
    """Build PhysicalParams from a config, enforcing one route per quantity."""
    direct = cfg.omega0_hz is not None
    two_photon = any(
        v is not None for v in (cfg.omega1_hz, cfg.omega2_hz, cfg.delta_hz)
    )
    if direct and two_photon:
        raise ConfigError(
            "give either physical.omega0_hz or the two-photon trio, not both"
        )
    if direct:
        omega0_hz = cfg.omega0_hz
    elif two_photon:
        if None in (cfg.omega1_hz, cfg.omega2_hz, cfg.delta_hz):
            raise ConfigError(
                "two-photon drive needs physical.omega1_hz, omega2_hz and delta_hz"
            )
        drive = TwoPhotonDrive.from_hz(cfg.omega1_hz, cfg.omega2_hz, cfg.delta_hz)
        omega0_hz = abs(two_photon_rabi(drive)) / (2.0 * np.pi)
    else:
        raise ConfigError("no drive strength configured (physical.omega0_hz)")

    if (cfg.c6_au is None) == (cfg.c6_jm6 is None):
        raise ConfigError("give exactly one of physical.c6_au or physical.c6_jm6")
    c6 = convert_c6_atomic_units(cfg.c6_au) if cfg.c6_au is not None else cfg.c6_jm6
    return PhysicalParams.from_hz(omega0_hz, c6, cfg.gamma_per_s, cfg.kappa)


def resolve_cloud(cfg: RunConfig) -> CloudSpec:
    sigma = (cfg.sigma_x_m, cfg.sigma_y_m, cfg.sigma_z_m)
    if any(s is None for s in sigma):
        raise ConfigError("cloud needs cloud.sigma_x_m, sigma_y_m and sigma_z_m")
    if (cfg.cloud_n_atoms is None) == (cfg.peak_density_m3 is None):
        raise ConfigError("give exactly one of cloud.n_atoms or cloud.peak_density_m3")
    if cfg.cloud_n_atoms is not None:
        return CloudSpec(cfg.cloud_n_atoms, sigma)
    return CloudSpec.from_peak_density(cfg.peak_density_m3, sigma)


def resolve_time_grid(cfg: RunConfig) -> np.ndarray:
    if cfg.time_stop_s is None or cfg.time_stop_s <= 0.0:
        raise ConfigError("time.stop_s must be set and positive")
    if cfg.time_num < 1:
        raise ConfigError("time.num must be at least 1")
    if cfg.time_spacing == "linear":
        return np.linspace(0.0, cfg.time_stop_s, cfg.time_num)
    start = cfg.time_start_s
    if start is None or not (0.0 < start < cfg.time_stop_s):
        raise ConfigError("log spacing needs 0 < time.start_s < time.stop_s")
    if cfg.time_num < 2:
        raise ConfigError("log spacing needs time.num >= 2")
    return np.concatenate(
        [[0.0], np.geomspace(start, cfg.time_stop_s, cfg.time_num - 1)]
    )
