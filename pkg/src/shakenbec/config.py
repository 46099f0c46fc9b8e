"""Run configuration: flat key = value files with [section] headers.

Frequencies in config files are Hz by default ([units] frequency = hz)
and are converted to angular frequencies internally; set
frequency = rad_s to pass values straight through (handy for
dimensionless studies with j = 1).  Exponential rates such as gamma0
are e-folding rates in 1/s and are never scaled by 2*pi.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import ConfigError
from .model import DriveSpec, Envelope, Grid, LatticeParams, Trajectory
from .specialmath import (
    ATOMIC_MASS_KG,
    RB87_MASS_U,
    BandProblem,
    hopping_from_depth,
)
from .twa import EnsembleConfig, TwaRunConfig
from .bdg import BdgRunConfig

TWO_PI = 2.0 * math.pi
_REQUIRED = object()


def _preset_dir():
    return resources.files("shakenbec").joinpath("presets")


def available_presets() -> list[str]:
    names = []
    for entry in _preset_dir().iterdir():
        if entry.name.endswith(".cfg"):
            names.append(entry.name[: -len(".cfg")])
    return sorted(names)


def load_config(
    path: str | None = None, preset: str | None = None
) -> configparser.ConfigParser:
    """Layered config: preset first, then an optional file on top."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if preset is not None:
        entry = _preset_dir().joinpath(f"{preset.lower()}.cfg")
        if not entry.is_file():
            raise ConfigError(
                f"unknown preset '{preset}'; available: {', '.join(available_presets())}"
            )
        cp.read_string(entry.read_text(encoding="utf-8"), source=f"preset:{preset}")
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                cp.read_file(fh, source=str(path))
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc
    return cp


def _get(cp, section: str, key: str, conv, default=_REQUIRED):
    if not cp.has_option(section, key):
        if default is _REQUIRED:
            raise ConfigError(f"missing required key '{key}' in section [{section}]")
        return default
    raw = cp.get(section, key)
    try:
        return conv(raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(
            f"bad value for '{key}' in section [{section}]: {raw!r} ({exc})"
        ) from exc


def _bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def frequency_scale(cp) -> float:
    """Multiplier turning configured frequencies into rad/s."""
    unit = _get(cp, "units", "frequency", str, "hz").strip().lower()
    if unit == "hz":
        return TWO_PI
    if unit == "rad_s":
        return 1.0
    raise ConfigError(f"[units] frequency must be 'hz' or 'rad_s', got '{unit}'")


def lattice_from_config(cp) -> LatticeParams:
    """Build LatticeParams; hopping either direct (j) or from a depth.

    With depth_er given instead of j, the recoil energy comes from an
    explicit 'recoil' key (frequency units) or from wavelength_nm and
    mass_u (default rubidium-87), and j is solved from the band width.
    """
    if not cp.has_section("lattice"):
        raise ConfigError("missing required section [lattice]")
    scale = frequency_scale(cp)
    if cp.has_option("lattice", "j"):
        j = scale * _get(cp, "lattice", "j", float)
    elif cp.has_option("lattice", "depth_er"):
        depth = _get(cp, "lattice", "depth_er", float)
        cutoff = _get(cp, "lattice", "cutoff", int, 21)
        if cp.has_option("lattice", "recoil"):
            recoil_hz = scale * _get(cp, "lattice", "recoil", float) / TWO_PI
            problem = BandProblem(depth, recoil_hz, cutoff)
        else:
            wavelength = 1e-9 * _get(cp, "lattice", "wavelength_nm", float)
            mass = ATOMIC_MASS_KG * _get(cp, "lattice", "mass_u", float, RB87_MASS_U)
            problem = BandProblem.from_physical(depth, wavelength, mass, cutoff)
        j = TWO_PI * hopping_from_depth(problem)
    else:
        raise ConfigError("missing required key 'j' in section [lattice]")
    g = scale * _get(cp, "lattice", "g", float)
    n0 = _get(cp, "lattice", "n0", float, 1.0)
    gamma0 = _get(cp, "lattice", "gamma0", float, 0.0)  # 1/s, never scaled
    if cp.has_option("lattice", "transverse_recoil"):
        er_rad = scale * _get(cp, "lattice", "transverse_recoil", float)
        m_z = math.pi**2 / (2.0 * er_rad)
    else:
        m_z = _get(cp, "lattice", "m_z", float, 1.0)
    return LatticeParams(j=j, g=g, n0=n0, gamma0=gamma0, m_z=m_z)


_TRAJECTORIES = {t.value: t for t in Trajectory}


def drive_from_config(cp) -> DriveSpec:
    """Build DriveSpec from [drive]; envelope keys are all optional.

    An envelope is attached when any of ramp_up / hold / ramp_down /
    abrupt_stop / end_phase appears (otherwise the drive runs at
    constant amplitude, the natural setting for rate extraction).
    """
    if not cp.has_section("drive"):
        raise ConfigError("missing required section [drive]")
    scale = frequency_scale(cp)
    name = _get(cp, "drive", "trajectory", str).strip().lower()
    if name not in _TRAJECTORIES:
        raise ConfigError(
            f"unknown trajectory '{name}'; choose from {', '.join(_TRAJECTORIES)}"
        )
    k0 = _get(cp, "drive", "k0", float)
    omega = scale * _get(cp, "drive", "omega", float)
    env_keys = ("ramp_up", "hold", "ramp_down", "abrupt_stop", "end_phase")
    envelope = None
    if any(cp.has_option("drive", k) for k in env_keys):
        envelope = Envelope(
            ramp_up=_get(cp, "drive", "ramp_up", int, 1),
            hold=_get(cp, "drive", "hold", int, 0),
            ramp_down=_get(cp, "drive", "ramp_down", int, 0),
            abrupt_stop=_get(cp, "drive", "abrupt_stop", _bool, False),
            end_phase=_get(cp, "drive", "end_phase", float, 0.0),
        )
    return DriveSpec(
        trajectory=_TRAJECTORIES[name], k0=k0, omega=omega, envelope=envelope
    )


@dataclass(frozen=True)
class ScanSpec:
    """A one-dimensional parameter scan."""

    variable: str  # omega | k0 | g
    values: np.ndarray  # rad/s for frequency-like variables


def scan_from_config(cp, allowed: tuple[str, ...]) -> ScanSpec | None:
    """Parse [scan]; returns None when the section is absent."""
    if not cp.has_section("scan"):
        return None
    variable = _get(cp, "scan", "variable", str).strip().lower()
    if variable not in allowed:
        raise ConfigError(
            f"scan variable '{variable}' not supported here; allowed: {', '.join(allowed)}"
        )
    if cp.has_option("scan", "values"):
        raw = _get(cp, "scan", "values", str)
        try:
            values = np.array([float(tok) for tok in raw.split(",") if tok.strip()])
        except ValueError as exc:
            raise ConfigError(f"bad [scan] values list: {raw!r}") from exc
        if values.size == 0:
            raise ConfigError("[scan] values list is empty")
    else:
        start = _get(cp, "scan", "start", float)
        stop = _get(cp, "scan", "stop", float)
        count = _get(cp, "scan", "count", int)
        spacing = _get(cp, "scan", "spacing", str, "linear").strip().lower()
        if count < 1:
            raise ConfigError("[scan] count must be >= 1")
        if spacing == "linear":
            values = np.linspace(start, stop, count)
        elif spacing == "log":
            if start <= 0.0 or stop <= 0.0:
                raise ConfigError("[scan] log spacing needs positive start and stop")
            values = np.geomspace(start, stop, count)
        else:
            raise ConfigError(f"[scan] spacing must be linear or log, got '{spacing}'")
    if values.size > 1:
        steps = np.diff(values)
        if not (np.all(steps > 0.0) or np.all(steps < 0.0)):
            raise ConfigError("[scan] values must be strictly monotonic")
    if variable in ("omega", "g"):
        values = frequency_scale(cp) * values
    return ScanSpec(variable=variable, values=values)


def grid_from_config(cp, section: str, default_nz: int = 1) -> Grid:
    return Grid(
        nx=_get(cp, section, "nx", int, 16),
        ny=_get(cp, section, "ny", int, 16),
        nz=_get(cp, section, "nz", int, default_nz),
        lz=_get(cp, section, "lz", float, 1.0),
    )


def bdg_from_config(cp) -> BdgRunConfig:
    if not cp.has_section("bdg"):
        raise ConfigError("missing required section [bdg]")
    return BdgRunConfig(
        steps_per_period=_get(cp, "bdg", "steps_per_period", int, 256),
        n_cycles=_get(cp, "bdg", "n_cycles", int, 32),
        grid=(
            _get(cp, "bdg", "nx", int, 24),
            _get(cp, "bdg", "ny", int, 24),
            _get(cp, "bdg", "nz", int, 1),
        ),
        lz=_get(cp, "bdg", "lz", float, 1.0),
        fit_window_cycles=_get(cp, "bdg", "fit_window_cycles", int, 8),
    )


def twa_from_config(cp, seed_override: int | None = None):
    """Returns (Grid, TwaRunConfig, EnsembleConfig, rate_window_cycles)."""
    if not cp.has_section("twa"):
        raise ConfigError("missing required section [twa]")
    grid = grid_from_config(cp, "twa", default_nz=1)
    n_cycles = _get(cp, "twa", "n_cycles", int, 0)
    run_cfg = TwaRunConfig(
        steps_per_period=_get(cp, "twa", "steps_per_period", int, 128),
        n_cycles=n_cycles if n_cycles > 0 else None,
        post_hold_periods=_get(cp, "twa", "post_hold_periods", int, 0),
    )
    master_seed = _get(cp, "twa", "master_seed", int, 0)
    if seed_override is not None:
        master_seed = seed_override
    ens_cfg = EnsembleConfig(
        n_realizations=_get(cp, "twa", "n_realizations", int, 16),
        master_seed=master_seed,
        bootstrap_resamples=_get(cp, "twa", "bootstrap_resamples", int, 200),
        noise_scale=_get(cp, "twa", "noise_scale", float, 1.0),
    )
    window = _get(cp, "twa", "rate_window_cycles", int, 8)
    if window < 1:
        raise ConfigError("[twa] rate_window_cycles must be >= 1")
    return grid, run_cfg, ens_cfg, window
