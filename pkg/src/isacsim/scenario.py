"""Physical scenario and waveform configuration.

Converts bistatic geometry (TX, RX, moving point targets) into the
ground-truth propagation paths (complex gain, delay, Doppler, AOD) that
drive the channel synthesis.  All quantities are linear/SI internally;
the JSON serialization uses degrees, dBm and dB (see ``scenario_to_dict``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299792458.0  # m/s


class ConfigurationError(ValueError):
    """Raised when a scenario violates a model-validity constraint."""


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(w: float) -> float:
    return 10.0 * math.log10(w) + 30.0


def round_half_away(x: float) -> int:
    """Round to nearest integer, halves away from zero."""
    return int(math.floor(abs(x) + 0.5)) * (1 if x >= 0 else -1)


@dataclass(frozen=True)
class WaveformConfig:
    """OFDM numerology and link-budget constants."""

    fc: float                   # carrier frequency [Hz]
    df: float                   # subcarrier spacing [Hz]
    n_subc: int                 # subcarriers N
    n_sym: int                  # symbols M
    cp_fraction: float = 0.07   # CP duration as a fraction of 1/df
    tx_power: float = 0.1       # [W]
    noise_psd: float = dbm_to_watts(-174.0)  # [W/Hz]
    noise_figure: float = db_to_linear(8.0)  # linear ratio
    n_tx: int = 8               # TX ULA element count

    def __post_init__(self):
        if self.n_subc < 1 or self.n_sym < 1:
            raise ConfigurationError("grid must have at least one subcarrier and one symbol")
        if self.df <= 0 or self.fc <= 0 or self.tx_power <= 0:
            raise ConfigurationError("fc, df and tx_power must be positive")
        if self.noise_psd <= 0 or self.noise_figure <= 0:
            raise ConfigurationError("noise parameters must be positive")

    @property
    def t_elem(self) -> float:
        """Elementary symbol duration T = 1/df [s]."""
        return 1.0 / self.df

    @property
    def t_cp(self) -> float:
        return self.cp_fraction / self.df

    @property
    def t_sym(self) -> float:
        """Total symbol duration, CP included [s]."""
        return self.t_cp + self.t_elem

    @property
    def bandwidth(self) -> float:
        return self.n_subc * self.df

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.fc

    @property
    def grid_size(self) -> int:
        return self.n_subc * self.n_sym


def noise_variance(cfg: WaveformConfig) -> float:
    """Receiver noise power over the occupied bandwidth: N0 * N * df * NF [W]."""
    return cfg.noise_psd * cfg.n_subc * cfg.df * cfg.noise_figure


@dataclass(frozen=True)
class TargetSpec:
    """A point scatterer with bistatic RCS."""

    position: tuple[float, float]   # [m]
    velocity: tuple[float, float]   # [m/s]
    rcs: float                      # bistatic RCS [m^2], linear

    def __post_init__(self):
        if self.rcs <= 0:
            raise ConfigurationError("target RCS must be positive")


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete bistatic scene: geometry, beam steering and waveform."""

    waveform: WaveformConfig
    tx_pos: tuple[float, float]
    rx_pos: tuple[float, float]
    beam_angle: float               # boresight steering angle [rad]
    targets: tuple[TargetSpec, ...] = ()
    element_spacing_wavelengths: float = 0.5
    random_gain_phase: bool = False  # draw an i.i.d. phase per path (robustness studies)
    gain_phase_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if np.allclose(self.tx_pos, self.rx_pos):
            raise ConfigurationError("TX and RX positions must differ")
        for t in self.targets:
            if np.allclose(t.position, self.tx_pos) or np.allclose(t.position, self.rx_pos):
                raise ConfigurationError("target collocated with TX or RX")

    def with_target_rcs(self, index: int, rcs: float) -> "ScenarioConfig":
        """Copy of the scenario with one target's RCS replaced."""
        targets = list(self.targets)
        t = targets[index]
        targets[index] = TargetSpec(t.position, t.velocity, rcs)
        return ScenarioConfig(
            self.waveform, self.tx_pos, self.rx_pos, self.beam_angle,
            tuple(targets), self.element_spacing_wavelengths,
            self.random_gain_phase, self.gain_phase_seed,
        )

    def with_tx_power(self, tx_power: float) -> "ScenarioConfig":
        wf = self.waveform
        new_wf = WaveformConfig(
            wf.fc, wf.df, wf.n_subc, wf.n_sym, wf.cp_fraction,
            tx_power, wf.noise_psd, wf.noise_figure, wf.n_tx,
        )
        return ScenarioConfig(
            new_wf, self.tx_pos, self.rx_pos, self.beam_angle,
            self.targets, self.element_spacing_wavelengths,
            self.random_gain_phase, self.gain_phase_seed,
        )


@dataclass(frozen=True)
class Path:
    """One propagation path; index 0 of a PathSet is the line of sight."""

    gain: complex       # beamforming gain absorbed, dimensionless
    delay: float        # [s]
    doppler: float      # [Hz]
    aod: float          # angle of departure [rad], from array boresight


@dataclass(frozen=True)
class PathSet:
    paths: tuple[Path, ...]

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)

    def __getitem__(self, i) -> Path:
        return self.paths[i]

    @property
    def gains(self) -> np.ndarray:
        return np.array([p.gain for p in self.paths], dtype=np.complex128)

    @property
    def delays(self) -> np.ndarray:
        return np.array([p.delay for p in self.paths])

    @property
    def dopplers(self) -> np.ndarray:
        return np.array([p.doppler for p in self.paths])


def steering_ula(theta: float, n_tx: int, spacing_m: float, wavelength: float) -> np.ndarray:
    """ULA steering vector, phase reference at element 0."""
    i = np.arange(n_tx)
    return np.exp(1j * 2.0 * np.pi / wavelength * i * spacing_m * np.sin(theta))


def array_gain(cfg: ScenarioConfig, theta: float) -> complex:
    """Complex TX gain a^T(theta) f for the fixed conjugate beamformer.

    f = sqrt(P/N) * conj(a(beam_angle)), so the boresight gain is sqrt(P*N).
    """
    wf = cfg.waveform
    d = cfg.element_spacing_wavelengths * wf.wavelength
    a_theta = steering_ula(theta, wf.n_tx, d, wf.wavelength)
    f = math.sqrt(wf.tx_power / wf.n_tx) * np.conj(
        steering_ula(cfg.beam_angle, wf.n_tx, d, wf.wavelength)
    )
    return complex(a_theta @ f)


def derive_paths(cfg: ScenarioConfig) -> PathSet:
    """Ground-truth (gain, delay, Doppler, AOD) for LOS plus each target.

    Doppler is the negative rate of change of the total bistatic path
    length over the wavelength; TX and RX are stationary, so the LOS
    Doppler is zero.  Path magnitudes follow the free-space bistatic
    budget (lambda/(4 pi d0) for LOS, lambda sqrt(rcs)/((4 pi)^{3/2} d1 d2)
    for scatterers) and are multiplied by the complex TX array gain.
    """
    wf = cfg.waveform
    lam = wf.wavelength
    tx = np.asarray(cfg.tx_pos, dtype=float)
    rx = np.asarray(cfg.rx_pos, dtype=float)

    d0 = float(np.linalg.norm(rx - tx))
    if d0 == 0.0:
        raise ConfigurationError("zero TX-RX distance")
    aod0 = math.atan2(rx[1] - tx[1], rx[0] - tx[0])
    g0 = array_gain(cfg, aod0)
    paths = [Path(gain=(lam / (4.0 * np.pi * d0)) * g0, delay=d0 / SPEED_OF_LIGHT,
                  doppler=0.0, aod=aod0)]

    for t in cfg.targets:
        p = np.asarray(t.position, dtype=float)
        v = np.asarray(t.velocity, dtype=float)
        d1 = float(np.linalg.norm(p - tx))
        d2 = float(np.linalg.norm(rx - p))
        if d1 == 0.0 or d2 == 0.0:
            raise ConfigurationError("zero-length bistatic leg")
        u_t = (p - tx) / d1   # unit vector TX -> target
        u_r = (p - rx) / d2   # unit vector RX -> target
        rate = float(v @ u_t + v @ u_r)  # d/dt of total path length
        doppler = -rate / lam
        aod = math.atan2(p[1] - tx[1], p[0] - tx[0])
        mag = lam * math.sqrt(t.rcs) / ((4.0 * np.pi) ** 1.5 * d1 * d2)
        paths.append(Path(gain=mag * array_gain(cfg, aod),
                          delay=(d1 + d2) / SPEED_OF_LIGHT, doppler=doppler, aod=aod))

    if cfg.random_gain_phase:
        rng = np.random.default_rng(cfg.gain_phase_seed)
        phases = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=len(paths)))
        paths = [Path(p.gain * ph, p.delay, p.doppler, p.aod)
                 for p, ph in zip(paths, phases)]

    delays = [p.delay for p in paths]
    if max(delays) - min(delays) > wf.t_cp:
        raise ConfigurationError(
            f"delay spread {max(delays) - min(delays):.3e} s exceeds CP {wf.t_cp:.3e} s"
        )
    return PathSet(tuple(paths))


def snap_to_grid(paths: PathSet, wf: WaveformConfig) -> PathSet:
    """Move every delay/Doppler to the nearest delay-Doppler FFT bin center."""
    d_res = 1.0 / (wf.n_subc * wf.df)
    v_res = 1.0 / (wf.n_sym * wf.t_sym)
    snapped = [
        Path(p.gain,
             round_half_away(p.delay / d_res) * d_res,
             round_half_away(p.doppler / v_res) * v_res,
             p.aod)
        for p in paths
    ]
    return PathSet(tuple(snapped))


def true_bins(paths: PathSet, wf: WaveformConfig) -> list[tuple[int, int]]:
    """Nearest (delay_bin, doppler_bin) on the image grid for each path."""
    out = []
    for p in paths:
        pb = round_half_away(p.delay * wf.n_subc * wf.df) % wf.n_subc
        qb = round_half_away(p.doppler * wf.n_sym * wf.t_sym) % wf.n_sym
        out.append((pb, qb))
    return out


# --- JSON serialization ------------------------------------------------
#
# File units: angles in degrees, tx power in dBm, noise PSD in dBm/Hz,
# noise figure in dB, RCS in dBsm.  Everything is converted to
# radians/linear on load.

def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    wf = cfg.waveform
    return {
        "waveform": {
            "fc_hz": wf.fc,
            "df_hz": wf.df,
            "n_subc": wf.n_subc,
            "n_sym": wf.n_sym,
            "cp_fraction": wf.cp_fraction,
            "tx_power_dbm": watts_to_dbm(wf.tx_power),
            "noise_psd_dbm_hz": watts_to_dbm(wf.noise_psd),
            "noise_figure_db": linear_to_db(wf.noise_figure),
            "n_tx": wf.n_tx,
        },
        "tx_pos_m": list(cfg.tx_pos),
        "rx_pos_m": list(cfg.rx_pos),
        "beam_angle_deg": math.degrees(cfg.beam_angle),
        "element_spacing_wavelengths": cfg.element_spacing_wavelengths,
        "random_gain_phase": cfg.random_gain_phase,
        "gain_phase_seed": cfg.gain_phase_seed,
        "targets": [
            {
                "position_m": list(t.position),
                "velocity_mps": list(t.velocity),
                "rcs_dbsm": linear_to_db(t.rcs),
            }
            for t in cfg.targets
        ],
    }


def scenario_from_dict(d: dict) -> ScenarioConfig:
    w = d["waveform"]
    wf = WaveformConfig(
        fc=float(w["fc_hz"]),
        df=float(w["df_hz"]),
        n_subc=int(w["n_subc"]),
        n_sym=int(w["n_sym"]),
        cp_fraction=float(w.get("cp_fraction", 0.07)),
        tx_power=dbm_to_watts(float(w["tx_power_dbm"])),
        noise_psd=dbm_to_watts(float(w["noise_psd_dbm_hz"])),
        noise_figure=db_to_linear(float(w["noise_figure_db"])),
        n_tx=int(w["n_tx"]),
    )
    targets = tuple(
        TargetSpec(
            position=tuple(t["position_m"]),
            velocity=tuple(t["velocity_mps"]),
            rcs=db_to_linear(float(t["rcs_dbsm"])),
        )
        for t in d.get("targets", [])
    )
    return ScenarioConfig(
        waveform=wf,
        tx_pos=tuple(d["tx_pos_m"]),
        rx_pos=tuple(d["rx_pos_m"]),
        beam_angle=math.radians(float(d["beam_angle_deg"])),
        targets=targets,
        element_spacing_wavelengths=float(d.get("element_spacing_wavelengths", 0.5)),
        random_gain_phase=bool(d.get("random_gain_phase", False)),
        gain_phase_seed=int(d.get("gain_phase_seed", 0)),
    )


def load_scenario(path: str) -> ScenarioConfig:
    with open(path) as f:
        return scenario_from_dict(json.load(f))


def save_scenario(cfg: ScenarioConfig, path: str) -> None:
    with open(path, "w") as f:
        json.dump(scenario_to_dict(cfg), f, indent=2)
        f.write("\n")


def reference_scenario() -> ScenarioConfig:
    """The default two-target evaluation scene used by the experiment suite."""
    wf = WaveformConfig(fc=28e9, df=120e3, n_subc=400, n_sym=60)
    return ScenarioConfig(
        waveform=wf,
        tx_pos=(0.0, 0.0),
        rx_pos=(50.0, 0.0),
        beam_angle=math.radians(10.0),
        targets=(
            TargetSpec(position=(56.9, 10.0), velocity=(1.4, -2.2), rcs=db_to_linear(4.9)),
            TargetSpec(position=(79.4, 7.0), velocity=(2.2, -13.7), rcs=db_to_linear(1.5)),
        ),
    )
