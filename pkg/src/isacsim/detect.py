"""2-D cell-averaging CFAR on delay-Doppler images plus truth association.

The noise level at each cell is the mean over a rectangular training
ring (outer box minus guard box, toroidal by default since FFT grids are
periodic).  The threshold multiplier alpha = N_t (Pfa^(-1/N_t) - 1) is
exact for exponentially distributed cells, which is the off-peak model
for squared-magnitude images under Gaussian noise.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import uniform_filter

from .scenario import SPEED_OF_LIGHT, PathSet, WaveformConfig, true_bins


@dataclass(frozen=True)
class CfarConfig:
    """Window geometry as (delay_cells, doppler_cells) half-widths.

    ``training`` is the outer-box half-width; the ring is the outer box
    minus the guard box.  The defaults extend the ring along Doppler
    rather than delay so that closely spaced same-Doppler returns do not
    sit in each other's training cells.
    """

    pfa: float = 1e-4
    guard: tuple[int, int] = (3, 2)
    training: tuple[int, int] = (4, 10)
    wrap: bool = True

    def __post_init__(self):
        if not 0.0 < self.pfa < 1.0:
            raise ValueError("pfa must be in (0, 1)")
        if any(g < 0 for g in self.guard) or any(t < 0 for t in self.training):
            raise ValueError("window half-widths must be nonnegative")
        if self.guard[0] > self.training[0] or self.guard[1] > self.training[1]:
            raise ValueError("guard window must fit inside the training window")
        if self.ring_cells < 1:
            raise ValueError("training ring is empty")

    @property
    def outer_size(self) -> tuple[int, int]:
        return (2 * self.training[0] + 1, 2 * self.training[1] + 1)

    @property
    def inner_size(self) -> tuple[int, int]:
        return (2 * self.guard[0] + 1, 2 * self.guard[1] + 1)

    @property
    def ring_cells(self) -> int:
        o, i = self.outer_size, self.inner_size
        return o[0] * o[1] - i[0] * i[1]

    def to_dict(self) -> dict:
        return {"pfa": self.pfa, "guard": list(self.guard),
                "training": list(self.training), "wrap": self.wrap}

    @staticmethod
    def from_dict(d: dict) -> "CfarConfig":
        return CfarConfig(
            pfa=float(d.get("pfa", 1e-4)),
            guard=tuple(d.get("guard", (3, 2))),
            training=tuple(d.get("training", (4, 10))),
            wrap=bool(d.get("wrap", True)),
        )


@dataclass(frozen=True)
class Detection:
    delay_bin: int
    doppler_bin: int
    value: float
    threshold: float


@dataclass(frozen=True)
class DetectionList:
    """CFAR peaks sorted by image value, strongest first."""

    peaks: tuple[Detection, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.peaks)

    def __iter__(self):
        return iter(self.peaks)

    def bins(self) -> list[tuple[int, int]]:
        return [(p.delay_bin, p.doppler_bin) for p in self.peaks]


def cfar_alpha(n_training: int, pfa: float) -> float:
    """Exponential-cell CA-CFAR threshold multiplier."""
    return n_training * (pfa ** (-1.0 / n_training) - 1.0)


def _box_sum(image: np.ndarray, size: tuple[int, int], wrap: bool) -> np.ndarray:
    mode = "wrap" if wrap else "constant"
    return uniform_filter(image, size=size, mode=mode, cval=0.0) * (size[0] * size[1])


def threshold_map(image: np.ndarray, cfg: CfarConfig) -> np.ndarray:
    """Per-cell CFAR threshold alpha * (training-ring mean)."""
    image = np.asarray(image, dtype=float)
    n, m = image.shape
    if cfg.outer_size[0] > n or cfg.outer_size[1] > m:
        raise ValueError(
            f"training window {cfg.outer_size} larger than grid {(n, m)}"
        )
    ring_sum = _box_sum(image, cfg.outer_size, cfg.wrap) - _box_sum(image, cfg.inner_size, cfg.wrap)
    # The separable moving sums leave cancellation residue of either sign
    # in flat regions; a negative threshold would turn exact zeros into
    # exceedances, so clamp.
    ring_sum = np.maximum(ring_sum, 0.0)
    if cfg.wrap:
        n_t = float(cfg.ring_cells)
        return cfar_alpha(n_t, cfg.pfa) * (ring_sum / n_t)
    # Truncated windows at the edges: per-cell ring count and multiplier.
    ones = np.ones_like(image)
    counts = _box_sum(ones, cfg.outer_size, False) - _box_sum(ones, cfg.inner_size, False)
    counts = np.maximum(np.rint(counts), 1.0)
    alpha = counts * (cfg.pfa ** (-1.0 / counts) - 1.0)
    return alpha * (ring_sum / counts)


def _neighbor_max(masked: np.ndarray, wrap: bool) -> np.ndarray:
    """Max over the 8-neighborhood of each cell (toroidal when wrap)."""
    if wrap:
        shifted = [
            np.roll(masked, (dp, dq), axis=(0, 1))
            for dp in (-1, 0, 1) for dq in (-1, 0, 1) if (dp, dq) != (0, 0)
        ]
        return np.maximum.reduce(shifted)
    padded = np.pad(masked, 1, constant_values=-np.inf)
    shifted = [
        padded[1 + dp:1 + dp + masked.shape[0], 1 + dq:1 + dq + masked.shape[1]]
        for dp in (-1, 0, 1) for dq in (-1, 0, 1) if (dp, dq) != (0, 0)
    ]
    return np.maximum.reduce(shifted)


# Squared-magnitude float64 images have no meaningful content below
# ~1e-31 of their peak (squared rounding noise of the DFT); flooring
# relative to the peak keeps noiseless images from emitting rounding
# artifacts as detections while preserving scale invariance.
RELATIVE_FLOOR = 1e-28


def cfar_2d(image: np.ndarray, cfg: CfarConfig) -> DetectionList:
    """Detect peaks: threshold exceedances that are local maxima.

    A cell is a peak when it exceeds its CFAR threshold and no exceeding
    8-neighbor has a larger image value.  Cells below RELATIVE_FLOOR
    times the image maximum are treated as exactly zero.
    """
    image = np.asarray(image, dtype=float)
    image = np.where(image > image.max() * RELATIVE_FLOOR, image, 0.0)
    thr = threshold_map(image, cfg)
    exceed = image > thr
    if not exceed.any():
        return DetectionList()
    masked = np.where(exceed, image, -np.inf)
    nbr = _neighbor_max(masked, cfg.wrap)
    peak_mask = exceed & (image >= nbr)
    rows, cols = np.nonzero(peak_mask)
    order = np.argsort(-image[rows, cols], kind="stable")
    peaks = tuple(
        Detection(int(rows[i]), int(cols[i]), float(image[rows[i], cols[i]]),
                  float(thr[rows[i], cols[i]]))
        for i in order
    )
    return DetectionList(peaks=peaks)


def _toroidal_distance(a: int, b: int, size: int) -> int:
    d = abs(a - b) % size
    return min(d, size - d)


def associate(
    detections: DetectionList,
    truth: PathSet,
    gate: int,
    wf: WaveformConfig,
) -> np.ndarray:
    """Per-path hit flags: a path counts as detected when a peak falls
    within +/- gate bins (toroidal) of its true bin in both axes.

    Peaks are consumed strongest-first and each may claim one path; when
    a peak gates with several unclaimed paths it goes to the one with the
    strongest true gain.
    """
    bins = true_bins(truth, wf)
    hits = np.zeros(len(truth), dtype=bool)
    for peak in detections:  # already sorted by amplitude
        candidates = [
            k for k, (pb, qb) in enumerate(bins)
            if not hits[k]
            and _toroidal_distance(peak.delay_bin, pb, wf.n_subc) <= gate
            and _toroidal_distance(peak.doppler_bin, qb, wf.n_sym) <= gate
        ]
        if candidates:
            best = max(candidates, key=lambda k: abs(truth[k].gain))
            hits[best] = True
    return hits


def signed_doppler_bin(q: int, m: int) -> int:
    """Map a doppler bin index into [-M/2, M/2)."""
    return q - m if q >= (m + 1) // 2 else q


def export_peaks_csv(
    detections: DetectionList,
    wf: WaveformConfig,
    los_distance_m: float,
    path: str,
) -> None:
    """Peak list with physical axes: differential range and signed Doppler."""
    range_res = SPEED_OF_LIGHT / (wf.n_subc * wf.df)
    doppler_res = 1.0 / (wf.n_sym * wf.t_sym)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["delay_bin", "doppler_bin", "differential_range_m",
                    "doppler_hz", "image_value", "threshold"])
        for p in detections:
            diff_range = p.delay_bin * range_res - los_distance_m
            dop = signed_doppler_bin(p.doppler_bin, wf.n_sym) * doppler_res
            w.writerow([p.delay_bin, p.doppler_bin, f"{diff_range:.9g}",
                        f"{dop:.9g}", f"{p.value:.9g}", f"{p.threshold:.9g}"])
