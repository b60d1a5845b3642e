"""Structured channel synthesis and noisy observation of the TX grid.

The frequency/slow-time channel is a sum of rank-1 delay-Doppler atoms
b(tau) c(nu)^T; the received grid is Y = X (.) H + Z with circularly
symmetric AWGN.  Indexing runs from 0 on both axes so the atoms align
exactly with the unitary-DFT bins used by the receiver.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .ofdm import TxFrame
from .scenario import PathSet, WaveformConfig


def steering_freq(tau: float, n: int, df: float) -> np.ndarray:
    """Frequency-domain steering vector, element k = exp(-j 2 pi k df tau)."""
    return np.exp(-2j * np.pi * np.arange(n) * df * tau)


def steering_time(nu: float, m: int, t_sym: float) -> np.ndarray:
    """Slow-time steering vector, element k = exp(+j 2 pi k T_sym nu)."""
    return np.exp(2j * np.pi * np.arange(m) * t_sym * nu)


@dataclass(frozen=True)
class ChannelMatrix:
    h: np.ndarray  # (N, M) complex

    @property
    def shape(self) -> tuple[int, int]:
        return self.h.shape


@dataclass(frozen=True)
class RxFrame:
    """Received grid; the true PathSet rides along for scoring only."""

    y: np.ndarray  # (N, M) complex
    truth: PathSet | None = None


def synthesize_channel(paths: PathSet, cfg: WaveformConfig) -> ChannelMatrix:
    """H = sum_k alpha_k b(tau_k) c(nu_k)^T over the (N, M) grid."""
    h = np.zeros((cfg.n_subc, cfg.n_sym), dtype=np.complex128)
    for p in paths:
        b = steering_freq(p.delay, cfg.n_subc, cfg.df)
        c = steering_time(p.doppler, cfg.n_sym, cfg.t_sym)
        h += p.gain * np.outer(b, c)
    return ChannelMatrix(h=h)


def noise_rng(master_seed: int, trial: int, context: int = 0) -> np.random.Generator:
    """Per-trial noise stream, independent of data/pilot seeds.

    Streams are keyed by (master seed, context, trial) so trials are
    order-independent and safe to generate from parallel workers.
    """
    return np.random.default_rng([int(master_seed), 0x4015E, int(context), int(trial)])


def complex_awgn(rng: np.random.Generator, shape: tuple[int, ...], sigma2: float) -> np.ndarray:
    """Circularly symmetric complex Gaussian, variance sigma2 per entry."""
    scale = np.sqrt(sigma2 / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def apply_channel(
    x: TxFrame | np.ndarray,
    h: ChannelMatrix,
    sigma2: float,
    seed_or_rng: int | np.random.Generator,
    truth: PathSet | None = None,
) -> RxFrame:
    """Y = X (.) H + Z with i.i.d. CN(0, sigma2) noise, reproducible from seed."""
    xg = x.x if isinstance(x, TxFrame) else np.asarray(x)
    if xg.shape != h.h.shape:
        raise ValueError(f"grid shape mismatch {xg.shape} vs {h.h.shape}")
    y = xg * h.h
    if sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    if sigma2 > 0:
        rng = (seed_or_rng if isinstance(seed_or_rng, np.random.Generator)
               else np.random.default_rng([int(seed_or_rng), 0x4015E]))
        y = y + complex_awgn(rng, xg.shape, sigma2)
    return RxFrame(y=y, truth=truth)


# --- binary grid dump ---------------------------------------------------
#
# Little-endian float64, row-major; complex grids store interleaved
# real/imag pairs.  A JSON sidecar (<path>.json) records the dimensions,
# so files can be consumed by other languages for golden tests.

def write_grid(path: str, grid: np.ndarray) -> None:
    grid = np.ascontiguousarray(grid)
    if np.iscomplexobj(grid):
        grid.astype("<c16").tofile(path)
        dtype = "complex128"
    else:
        grid.astype("<f8").tofile(path)
        dtype = "float64"
    sidecar = {
        "rows": int(grid.shape[0]),
        "cols": int(grid.shape[1]),
        "dtype": dtype,
        "byte_order": "little-endian",
        "order": "row-major",
        "layout": "interleaved-real-imag" if dtype == "complex128" else "scalar",
    }
    with open(path + ".json", "w") as f:
        json.dump(sidecar, f, indent=2)
        f.write("\n")


def read_grid(path: str) -> np.ndarray:
    with open(path + ".json") as f:
        meta = json.load(f)
    dt = "<c16" if meta["dtype"] == "complex128" else "<f8"
    flat = np.fromfile(path, dtype=dt)
    return flat.reshape((meta["rows"], meta["cols"]))
