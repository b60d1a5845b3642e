"""Detection probability, constellation-constrained rate and range profiles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .channel import ChannelMatrix, complex_awgn
from .ofdm import Constellation
from .scenario import SPEED_OF_LIGHT, ScenarioConfig, derive_paths, round_half_away

PROFILE_FLOOR_DB = -300.0


def empirical_pd(trial_hits) -> float:
    """Fraction of trials in which the target was detected."""
    hits = np.asarray(trial_hits, dtype=bool)
    if hits.size == 0:
        raise ValueError("need at least one trial")
    return float(hits.mean())


def pd_stderr(pd: float, n_trials: int) -> float:
    """Binomial standard error of an empirical detection probability."""
    return math.sqrt(max(pd * (1.0 - pd), 0.0) / n_trials)


def _mi_kernel(h: np.ndarray, x: np.ndarray, z: np.ndarray,
               points: np.ndarray, sigma2: float) -> np.ndarray:
    """log2 sum_x' exp((-|h(x - x') + z|^2 + |z|^2)/sigma2) per sample."""
    diff = h[:, None] * (x[:, None] - points[None, :]) + z[:, None]
    arg = (-(diff.real ** 2 + diff.imag ** 2) + (np.abs(z) ** 2)[:, None]) / sigma2
    return logsumexp(arg, axis=1) / math.log(2.0)


def mutual_information(
    constellation: Constellation,
    h: ChannelMatrix | np.ndarray | complex,
    sigma2: float,
    n_mc: int,
    seed: int,
) -> float:
    """Monte Carlo I(X;Y) in bits for uniform symbols over y = h x + z.

    Each sample draws a grid cell (its gain), a symbol and a noise
    realization; the estimate is log2(Q) minus the sample mean of the
    log-sum kernel, clamped at zero.  The upper bound log2(Q) holds per
    sample because the transmitted symbol contributes exp(0) to the sum.
    """
    if n_mc < 1:
        raise ValueError("need at least one Monte Carlo sample")
    points = constellation.points
    q = points.size
    harr = h.h if isinstance(h, ChannelMatrix) else np.asarray(h, dtype=np.complex128)
    h_flat = harr.reshape(-1)
    if sigma2 == 0.0:
        return float(np.log2(q) * np.mean(np.abs(h_flat) > 0))

    rng = np.random.default_rng([int(seed), 0x3141])
    chunk = max(1, (1 << 22) // q)
    total = 0.0
    done = 0
    while done < n_mc:
        b = min(chunk, n_mc - done)
        hc = h_flat[rng.integers(0, h_flat.size, b)] if h_flat.size > 1 else np.full(b, h_flat[0])
        x = points[rng.integers(0, q, b)]
        z = complex_awgn(rng, (b,), sigma2)
        total += float(_mi_kernel(hc, x, z, points, sigma2).sum())
        done += b
    mi = float(np.log2(q)) - total / n_mc
    return max(mi, 0.0)


def mutual_information_gauss_hermite(
    constellation: Constellation,
    h: complex,
    sigma2: float,
    order: int = 48,
) -> float:
    """Quadrature reference for the scalar-channel mutual information.

    Integrates the same kernel against the complex Gaussian noise density
    with a tensor Gauss-Hermite rule; independent of the Monte Carlo path
    and used to validate it.
    """
    points = constellation.points
    q = points.size
    if sigma2 == 0.0:
        return float(np.log2(q)) if h != 0 else 0.0
    t, w = np.polynomial.hermite.hermgauss(order)
    z = math.sqrt(sigma2) * (t[:, None] + 1j * t[None, :]).reshape(-1)
    wts = (w[:, None] * w[None, :]).reshape(-1) / math.pi
    acc = 0.0
    hz = np.full(z.size, complex(h))
    for x in points:
        kern = _mi_kernel(hz, np.full(z.size, x), z, points, sigma2)
        acc += float(np.dot(wts, kern))
    return float(np.log2(q)) - acc / q


@dataclass(frozen=True)
class RateResult:
    mi_per_symbol: float   # bits per data symbol
    rate: float            # bits per grid use after the pilot discount
    rho: float

    def __post_init__(self):
        if not 0.0 <= self.rho <= 100.0:
            raise ValueError("rho must be in [0, 100]")


def achievable_rate(mi: float, rho: float) -> RateResult:
    """Discount the per-symbol mutual information by the pilot fraction."""
    if not 0.0 <= rho <= 100.0:
        raise ValueError("rho must be in [0, 100]")
    return RateResult(mi_per_symbol=mi, rate=mi * (100.0 - rho) / 100.0, rho=rho)


def range_profile(
    image: np.ndarray,
    scenario: ScenarioConfig,
) -> tuple[np.ndarray, np.ndarray]:
    """Doppler-collapsed delay profile in dB, LOS-referenced.

    Collapses the image with a max over Doppler bins, converts delay bins
    to differential range (zero at the LOS bin) and normalizes the peak
    to 0 dB with a floor at -300 dB.
    """
    image = np.asarray(image, dtype=float)
    wf = scenario.waveform
    n = image.shape[0]
    profile = image.max(axis=1)
    los_delay = derive_paths(scenario)[0].delay
    los_bin = round_half_away(los_delay * wf.n_subc * wf.df)
    ranges = (np.arange(n) - los_bin) * SPEED_OF_LIGHT / (wf.n_subc * wf.df)
    peak = profile.max()
    if peak <= 0.0:
        return ranges, np.full(n, PROFILE_FLOOR_DB)
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(profile / peak)
    return ranges, np.maximum(db, PROFILE_FLOOR_DB)
