"""Truncated-Wigner simulation of the driven lattice condensate.

The classical field a(x, y, z, t) lives on nx x ny lattice sites and an
nz-point periodic grid of the continuous transverse direction.  Momentum
amplitudes use the unitary FFT convention scaled so that

    N = sum_q |A_q|^2,   A = fftn(a, norm="ortho") * sqrt(dz),

which makes |A_q|^2 directly comparable to Bogoliubov pair occupations
(per mode) and n_ex = sum_{q != q0} |A_q|^2 / volume an excited density.

Initial states sample the Wigner distribution of the Bogoliubov vacuum:
half a quantum of noise per mode, rotated by the static (u, v)
amplitudes, on top of the coherent condensate.  Evolution is a
second-order Strang splitting of the Gross-Pitaevskii equation in the
co-moving frame: half-step kinetic (diagonal in momentum, drive shift
evaluated at the substep midpoint), full-step contact interaction
(diagonal in position, exact phase rotation), half-step kinetic.
Ensemble means subtract the sampled half quantum per mode to estimate
the physical excited density.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import BlowUpError, ConfigError, DomainError
from .model import DriveSpec, Grid, LatticeParams, Momentum, drive_shift

FIELD_FORMAT = "shakenbec-field"
FIELD_VERSION = 1
GAUGE_TAG = "comoving-shift-v1"  # kinetic frame, dispersion at q - A(t)


@dataclass(frozen=True)
class TwaRunConfig:
    """Controls for a single classical-field trajectory.

    n_cycles = None runs for the drive envelope's scheduled periods plus
    post_hold_periods of free evolution; an explicit value overrides.
    Observables are recorded at every period boundary.
    """

    steps_per_period: int = 256
    n_cycles: int | None = None
    post_hold_periods: int = 0

    def __post_init__(self) -> None:
        if self.steps_per_period < 16:
            raise DomainError("steps_per_period must be >= 16")
        if self.n_cycles is not None and self.n_cycles < 1:
            raise DomainError("n_cycles must be >= 1 when given")
        if self.post_hold_periods < 0:
            raise DomainError("post_hold_periods must be >= 0")

    def resolve_cycles(self, drive: DriveSpec) -> int:
        if self.n_cycles is not None:
            return self.n_cycles
        env = drive.envelope
        scheduled = env.total_periods if env is not None else 0
        total = scheduled + self.post_hold_periods
        if total < 1:
            raise ConfigError(
                "run length is zero: give n_cycles, an envelope, or post_hold_periods"
            )
        return total


@dataclass(frozen=True)
class EnsembleConfig:
    """Sampling controls for truncated-Wigner ensembles.

    Realization k draws its noise from a counter-based stream keyed by
    (master_seed, k), so results are independent of worker count and
    scheduling order.
    """

    n_realizations: int = 50
    master_seed: int = 0
    bootstrap_resamples: int = 200
    noise_scale: float = 1.0
    q0: Momentum = Momentum(0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        if self.n_realizations < 1:
            raise DomainError("n_realizations must be >= 1")
        if self.bootstrap_resamples < 1:
            raise DomainError("bootstrap_resamples must be >= 1")
        if self.noise_scale < 0.0:
            raise DomainError("noise_scale must be >= 0")


@dataclass(frozen=True)
class FieldState:
    """Classical field in position space at one instant.

    amplitudes[ix, iy, iz] is the field on lattice site (ix, iy) and
    transverse slice iz; |a|^2 integrates to the atom number with the
    transverse measure dz.
    """

    amplitudes: np.ndarray
    grid: Grid
    t: float = 0.0
    condensate_index: tuple[int, int, int] = (0, 0, 0)
    noise_scale: float = 1.0
    gauge: str = GAUGE_TAG
    seed: int | None = None  # scalar sampling seed, when one was used


@dataclass(frozen=True)
class ObservableTrace:
    """Stroboscopic observables of one trajectory.

    n_ex_raw is the Wigner-mean excited density including the sampled
    half quantum per mode; n_ex subtracts half_quantum, the constant
    (n_modes - 1) noise_scale^2 / (2 volume).
    """

    times: np.ndarray
    n_ex_raw: np.ndarray
    n_ex: np.ndarray
    condensed_fraction: np.ndarray
    half_quantum: float
    realization: int | None = None


@dataclass(frozen=True)
class EnsembleResult:
    """Ensemble-averaged observables with bootstrap uncertainty bands.

    bands_degenerate marks ensembles too small for the bootstrap to say
    anything (a single realization); the bands are then zero width and
    should not be quoted.
    """

    times: np.ndarray
    n_ex_raw: np.ndarray
    n_ex: np.ndarray
    condensed_fraction: np.ndarray
    band_lo: np.ndarray  # mean - bootstrap std of n_ex
    band_hi: np.ndarray
    traces: tuple[ObservableTrace, ...]
    half_quantum: float
    bands_degenerate: bool = False


def _static_dispersion_rel(grid: Grid, p: LatticeParams, q0: Momentum) -> np.ndarray:
    """eps0(q) - eps0(q0) on the full grid (static lattice)."""

    def eps1d(qs):
        return 4.0 * p.j * np.sin(0.5 * qs) ** 2

    ex = eps1d(grid.qx_axis)[:, None, None]
    ey = eps1d(grid.qy_axis)[None, :, None]
    ez = (0.5 * grid.qz_axis**2 / p.m_z)[None, None, :]
    eps0 = ex + ey + ez
    i0 = grid.index_of(q0)
    return eps0 - eps0[i0]


def realization_rng(master_seed: int, realization: int) -> np.random.Generator:
    """Counter-based generator for one ensemble member."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence((master_seed, realization)))
    )


def sample_initial(
    grid: Grid,
    p: LatticeParams,
    q0: Momentum = Momentum(0.0, 0.0, 0.0),
    seed: int | np.random.Generator = 0,
    noise_scale: float = 1.0,
) -> FieldState:
    """Draw one Wigner sample of the Bogoliubov vacuum around a condensate.

    The condensate of |A|^2 = n0 * volume sits at q0 (which must be a
    grid momentum); every other mode receives u_q gamma_q +
    v_q gamma_-q^* with complex Gaussian gamma of mean square
    noise_scale^2 / 2.  Modes whose dispersion relative to the
    condensate is not positive (only possible for q0 != 0) fall back to
    bare vacuum noise (u, v) = (1, 0).  seed may be a scalar (stream 0
    of that seed) or a prepared generator for ensemble use.
    """
    scalar_seed: int | None = None
    if isinstance(seed, (int, np.integer)):
        scalar_seed = int(seed)
        rng = realization_rng(scalar_seed, 0)
    else:
        rng = seed
    if noise_scale < 0.0:
        raise DomainError("noise_scale must be >= 0")
    eps_rel = _static_dispersion_rel(grid, p, q0)
    i0 = grid.index_of(q0)

    uu = np.ones_like(eps_rel)
    vv = np.zeros_like(eps_rel)
    ok = eps_rel > 0.0
    e_ok = eps_rel[ok]
    energy = np.sqrt(e_ok * (e_ok + 2.0 * p.g))
    cosh2 = (e_ok + p.g) / energy
    uu[ok] = np.sqrt(0.5 * (cosh2 + 1.0))
    vv[ok] = -np.sqrt(np.maximum(0.5 * (cosh2 - 1.0), 0.0))

    shape = (grid.nx, grid.ny, grid.nz)
    gamma = noise_scale * (
        rng.normal(0.0, 0.5, shape) + 1j * rng.normal(0.0, 0.5, shape)
    )
    # pairing partner of grid index i is (2*i0 - i) mod n on each axis
    ix = (2 * i0[0] - np.arange(grid.nx)) % grid.nx
    iy = (2 * i0[1] - np.arange(grid.ny)) % grid.ny
    iz = (2 * i0[2] - np.arange(grid.nz)) % grid.nz
    gamma_pair = np.conj(gamma[np.ix_(ix, iy, iz)])

    amps_q = uu * gamma + vv * gamma_pair
    amps_q[i0] = math.sqrt(p.n0 * grid.volume)
    a = np.fft.ifftn(amps_q, norm="ortho") / math.sqrt(grid.dz)
    return FieldState(
        amplitudes=a,
        grid=grid,
        t=0.0,
        condensate_index=i0,
        noise_scale=noise_scale,
        seed=scalar_seed,
    )


def _kinetic_phases(grid: Grid, p: LatticeParams, dt_half: float, ax: float, ay: float):
    px = np.exp(-1j * dt_half * 4.0 * p.j * np.sin(0.5 * (grid.qx_axis - ax)) ** 2)
    py = np.exp(-1j * dt_half * 4.0 * p.j * np.sin(0.5 * (grid.qy_axis - ay)) ** 2)
    pz = np.exp(-1j * dt_half * 0.5 * grid.qz_axis**2 / p.m_z)
    return px[:, None, None], py[None, :, None], pz[None, None, :]


def _strang_step(
    a: np.ndarray,
    t: float,
    dt: float,
    grid: Grid,
    drive: DriveSpec,
    p: LatticeParams,
    u_coupling: float,
) -> np.ndarray:
    ax, ay = drive_shift(t + 0.25 * dt, drive)
    px, py, pz = _kinetic_phases(grid, p, 0.5 * dt, ax, ay)
    a = np.fft.ifftn(np.fft.fftn(a, norm="ortho") * px * py * pz, norm="ortho")
    a = a * np.exp(-1j * dt * u_coupling * np.abs(a) ** 2)
    ax, ay = drive_shift(t + 0.75 * dt, drive)
    px, py, pz = _kinetic_phases(grid, p, 0.5 * dt, ax, ay)
    return np.fft.ifftn(np.fft.fftn(a, norm="ortho") * px * py * pz, norm="ortho")


def gpe_step(
    state: FieldState, drive: DriveSpec, p: LatticeParams, dt: float
) -> FieldState:
    """Advance the field by one Strang split step of length dt."""
    if dt <= 0.0:
        raise DomainError("dt must be positive")
    a = _strang_step(state.amplitudes, state.t, dt, state.grid, drive, p, p.u)
    return replace(state, amplitudes=a, t=state.t + dt)


def _observables(
    a: np.ndarray, grid: Grid, i0: tuple[int, int, int]
) -> tuple[float, float]:
    amps_q = np.fft.fftn(a, norm="ortho") * math.sqrt(grid.dz)
    total = float(np.sum(np.abs(amps_q) ** 2))
    cond = float(np.abs(amps_q[i0]) ** 2)
    n_ex = (total - cond) / grid.volume
    cf = cond / total if total > 0.0 else 0.0
    return n_ex, cf


def run_trajectory(
    state: FieldState, drive: DriveSpec, p: LatticeParams, cfg: TwaRunConfig
) -> ObservableTrace:
    """Evolve one field sample, recording observables each drive period."""
    n_cycles = cfg.resolve_cycles(drive)
    period = drive.period
    dt = period / cfg.steps_per_period
    grid = state.grid
    i0 = state.condensate_index
    a = state.amplitudes.copy()
    half_quantum = (grid.n_modes - 1) * state.noise_scale**2 / (2.0 * grid.volume)

    times = state.t + np.arange(n_cycles + 1) * period
    n_raw = np.empty(n_cycles + 1)
    cf = np.empty(n_cycles + 1)
    n_raw[0], cf[0] = _observables(a, grid, i0)
    t = state.t
    for cycle in range(n_cycles):
        for _ in range(cfg.steps_per_period):
            a = _strang_step(a, t, dt, grid, drive, p, p.u)
            t += dt
        if not np.all(np.isfinite(a)):
            raise BlowUpError(
                f"field left the finite range in cycle {cycle + 1}; "
                "reduce the time step or the drive strength"
            )
        n_raw[cycle + 1], cf[cycle + 1] = _observables(a, grid, i0)
    return ObservableTrace(
        times=times,
        n_ex_raw=n_raw,
        n_ex=n_raw - half_quantum,
        condensed_fraction=cf,
        half_quantum=half_quantum,
    )


def _run_realization(payload) -> ObservableTrace:
    grid, drive, p, run_cfg, ens_cfg, k = payload
    rng = realization_rng(ens_cfg.master_seed, k)
    state = sample_initial(grid, p, ens_cfg.q0, rng, ens_cfg.noise_scale)
    try:
        trace = run_trajectory(state, drive, p, run_cfg)
    except BlowUpError as exc:
        raise BlowUpError(f"realization {k}: {exc}") from exc
    return replace(trace, realization=k)


def ensemble_run(
    grid: Grid,
    drive: DriveSpec,
    p: LatticeParams,
    run_cfg: TwaRunConfig,
    ens_cfg: EnsembleConfig,
    workers: int = 1,
) -> EnsembleResult:
    """Average an ensemble of Wigner samples; deterministic per seed.

    Bootstrap bands resample whole realizations (seeded from the master
    seed) and report mean +/- std of the resampled ensemble means.
    """
    payloads = [
        (grid, drive, p, run_cfg, ens_cfg, k) for k in range(ens_cfg.n_realizations)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(_run_realization, payloads))
    else:
        traces = [_run_realization(pl) for pl in payloads]

    raw = np.stack([tr.n_ex_raw for tr in traces])
    cf = np.stack([tr.condensed_fraction for tr in traces])
    mean_raw = raw.mean(axis=0)
    half_quantum = traces[0].half_quantum
    mean_sub = mean_raw - half_quantum

    rng = np.random.Generator(
        np.random.Philox(np.random.SeedSequence((ens_cfg.master_seed, 0xB00757)))
    )
    n_real = raw.shape[0]
    resampled = np.empty((ens_cfg.bootstrap_resamples, raw.shape[1]))
    for b in range(ens_cfg.bootstrap_resamples):
        pick = rng.integers(0, n_real, size=n_real)
        resampled[b] = raw[pick].mean(axis=0)
    band = resampled.std(axis=0)
    return EnsembleResult(
        times=traces[0].times,
        n_ex_raw=mean_raw,
        n_ex=mean_sub,
        condensed_fraction=cf.mean(axis=0),
        band_lo=mean_sub - band,
        band_hi=mean_sub + band,
        traces=tuple(traces),
        half_quantum=half_quantum,
        bands_degenerate=n_real < 2,
    )


def atom_number(state: FieldState) -> float:
    """Total atom number sum_q |A_q|^2 (conserved by the evolution)."""
    return float(np.sum(np.abs(state.amplitudes) ** 2) * state.grid.dz)


def field_energy(
    state: FieldState, p: LatticeParams, drive: DriveSpec | None = None
) -> float:
    """Mean-field energy of the state; conserved when the drive is off.

    Kinetic part evaluated with the co-moving shift at state.t when a
    drive is given, static dispersion otherwise.
    """
    grid = state.grid
    ax, ay = drive_shift(state.t, drive) if drive is not None else (0.0, 0.0)
    ex = 4.0 * p.j * np.sin(0.5 * (grid.qx_axis - ax)) ** 2
    ey = 4.0 * p.j * np.sin(0.5 * (grid.qy_axis - ay)) ** 2
    ez = 0.5 * grid.qz_axis**2 / p.m_z
    eps = ex[:, None, None] + ey[None, :, None] + ez[None, None, :]
    amps_q = np.fft.fftn(state.amplitudes, norm="ortho") * math.sqrt(grid.dz)
    kinetic = float(np.sum(eps * np.abs(amps_q) ** 2))
    interaction = 0.5 * p.u * float(np.sum(np.abs(state.amplitudes) ** 4)) * grid.dz
    return kinetic + interaction


def save_field(path, state: FieldState) -> None:
    """Write a field checkpoint: one JSON header line + raw amplitudes.

    Amplitudes are stored as little-endian complex128 in C order.
    """
    header = {
        "format": FIELD_FORMAT,
        "version": FIELD_VERSION,
        "nx": state.grid.nx,
        "ny": state.grid.ny,
        "nz": state.grid.nz,
        "lz": state.grid.lz,
        "t": state.t,
        "condensate_index": list(state.condensate_index),
        "noise_scale": state.noise_scale,
        "gauge": state.gauge,
        "seed": state.seed,
    }
    data = np.ascontiguousarray(state.amplitudes, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("utf-8") + b"\n")
        fh.write(data.tobytes())


def load_field(path) -> FieldState:
    """Read a checkpoint written by save_field; validates format/version."""
    with open(path, "rb") as fh:
        header_line = fh.readline()
        blob = fh.read()
    try:
        header = json.loads(header_line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"not a field checkpoint: {path}") from exc
    if header.get("format") != FIELD_FORMAT:
        raise ConfigError(f"unrecognized checkpoint format in {path}")
    if header.get("version") != FIELD_VERSION:
        raise ConfigError(
            f"unsupported checkpoint version {header.get('version')} in {path}"
        )
    grid = Grid(header["nx"], header["ny"], header["nz"], header["lz"])
    expected = grid.n_modes * 16
    if len(blob) != expected:
        raise ConfigError(
            f"checkpoint payload has {len(blob)} bytes, expected {expected}"
        )
    a = np.frombuffer(blob, dtype="<c16").reshape(grid.nx, grid.ny, grid.nz).copy()
    return FieldState(
        amplitudes=a,
        grid=grid,
        t=header["t"],
        condensate_index=tuple(header["condensate_index"]),
        noise_scale=header["noise_scale"],
        gauge=header.get("gauge", GAUGE_TAG),
        seed=header.get("seed"),
    )
