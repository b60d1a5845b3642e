"""Multi-stage receiver: pilot estimate, demodulation, data-aided refinement.

Stage 1 estimates the channel at pilot cells only (zero elsewhere),
images it, detects peaks, and rebuilds a structured estimate from the
detected delay-Doppler atoms.  Stage 2 demodulates the payload with an
LMMSE equalizer; Stage 3 re-estimates the channel at data cells from the
demodulated symbols (reciprocal filter, matched filter or LMMSE), while
pilot cells always keep their Stage-1 values.  Stage 4 images the
combined estimate and re-runs detection.

Scheme variants: ``pilot_only`` stops after the Stage-1 detection,
``genie`` refines with the true data symbols in a single pass, and
``data_aided`` iterates Stages 2-3.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .channel import RxFrame
from .detect import CfarConfig, DetectionList, cfar_2d
from .ofdm import PilotPattern, TxFrame, demap_hard

SCHEMES = ("pilot_only", "data_aided", "genie")
ESTIMATORS = ("RF", "MF", "LMMSE")


class EmptyPilotSetError(ValueError):
    """Pilot-based estimation requested with an empty pilot set."""


@dataclass(frozen=True)
class ChannelEstimate:
    """Unstructured channel estimate tied to the pilot pattern it honors."""

    h_hat: np.ndarray
    pilot_set: PilotPattern


@dataclass(frozen=True)
class ReceiverConfig:
    scheme: str = "data_aided"
    estimator: str = "LMMSE"
    max_iterations: int = 2
    snr_x: float = np.inf    # E|x|^2 / sigma^2, linear
    snr_h: float = np.inf    # sum_k |alpha_k|^2 / sigma^2, linear
    hard_decisions: bool = True

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if self.scheme == "data_aided" and self.max_iterations < 1:
            raise ValueError("data_aided requires max_iterations >= 1")


@dataclass
class PipelineOutput:
    """Final estimate and the detection history of one receiver run.

    ``stage1_detections`` is the sensing output available before any
    demodulation (None for the genie, which skips Stage 1 detection);
    ``per_iteration`` holds the detections after each demod+refine pass.
    """

    h_hat_final: ChannelEstimate
    detections: DetectionList
    x_hat: np.ndarray | None
    per_iteration: list[DetectionList] = field(default_factory=list)
    stage1_detections: DetectionList | None = None
    debug: dict | None = None


def stage1_pilot_estimate(y: RxFrame, x: TxFrame) -> ChannelEstimate:
    """Reciprocal filter at pilot cells, zeros at data cells."""
    if x.pilots.count == 0:
        raise EmptyPilotSetError("pilot-only estimation impossible: empty pilot set")
    h = np.zeros_like(y.y)
    mask = x.pilots.mask
    h[mask] = y.y[mask] / x.x[mask]
    return ChannelEstimate(h_hat=h, pilot_set=x.pilots)


def delay_doppler_image(h_hat: ChannelEstimate | np.ndarray) -> np.ndarray:
    """Squared-magnitude unitary 2-D DFT of the channel estimate.

    Bin (p, q) corresponds to delay p/(N df) and Doppler q/(M T_sym),
    with q read modulo M for signed Doppler.  Total image energy equals
    the squared Frobenius norm of the estimate (unitarity).
    """
    h = h_hat.h_hat if isinstance(h_hat, ChannelEstimate) else np.asarray(h_hat)
    n, m = h.shape
    g = np.fft.fft(np.fft.ifft(h, axis=0), axis=1) * np.sqrt(n / m)
    return np.abs(g) ** 2


def _bin_atom(n: int, m: int, delay_bin: int, doppler_bin: int) -> tuple[np.ndarray, np.ndarray]:
    b = np.exp(-2j * np.pi * np.arange(n) * delay_bin / n)
    c = np.exp(2j * np.pi * np.arange(m) * doppler_bin / m)
    return b, c


def dedupe_detections(detections: DetectionList) -> DetectionList:
    """Drop repeated delay-Doppler bins, keeping the first occurrence."""
    seen: set[tuple[int, int]] = set()
    kept = []
    for p in detections:
        key = (p.delay_bin, p.doppler_bin)
        if key not in seen:
            seen.add(key)
            kept.append(p)
    if len(kept) != len(detections):
        warnings.warn("duplicate detections dropped before least squares")
    return DetectionList(peaks=tuple(kept))


def ls_gains(h_hat: ChannelEstimate, detections: DetectionList) -> np.ndarray:
    """Least-squares path gains for the detected bins.

    Solves min || A g - vec(Hhat) || with column-major vec (subcarrier
    index fastest) and one on-grid delay-Doppler atom per column.
    Duplicate bins are dropped (with a warning); the returned vector
    aligns with the deduplicated detection order.
    """
    h = h_hat.h_hat
    n, m = h.shape
    dets = dedupe_detections(detections)
    if len(dets) == 0:
        return np.zeros(0, dtype=np.complex128)
    if len(dets) > n * m:
        raise ValueError("more detections than grid cells")
    cols = []
    for p in dets:
        b, c = _bin_atom(n, m, p.delay_bin, p.doppler_bin)
        cols.append((c[:, None] * b[None, :]).reshape(-1))  # index m*N + n
    a = np.stack(cols, axis=1)
    vec = h.T.reshape(-1)  # column-major: subcarrier fastest
    gains, *_ = np.linalg.lstsq(a, vec, rcond=None)
    return gains


def reconstruct_channel(
    gains: np.ndarray,
    detections: DetectionList,
    pilots: PilotPattern,
) -> ChannelEstimate:
    """Structured estimate sum_k g_k b(p_k) c(q_k)^T over the full grid."""
    if len(gains) != len(detections):
        raise ValueError("gain/detection length mismatch")
    n, m = pilots.n_subc, pilots.n_sym
    h = np.zeros((n, m), dtype=np.complex128)
    for g, p in zip(gains, detections):
        b, c = _bin_atom(n, m, p.delay_bin, p.doppler_bin)
        h += g * np.outer(b, c)
    return ChannelEstimate(h_hat=h, pilot_set=pilots)


def lmmse_demod(y: RxFrame, h_hat: ChannelEstimate, snr_x: float) -> np.ndarray:
    """Per-cell LMMSE data estimate; pilot cells are left at zero.

    Cells with a zero channel estimate come out as soft erasures rather
    than dividing by zero.
    """
    if not snr_x > 0:
        raise ValueError("snr_x must be positive")
    inv_snr = 0.0 if np.isinf(snr_x) else 1.0 / snr_x
    d = ~h_hat.pilot_set.mask
    hd = h_hat.h_hat[d]
    den = np.abs(hd) ** 2 + inv_snr
    num = y.y[d] * np.conj(hd)
    x_hat = np.zeros_like(y.y)
    x_hat[d] = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return x_hat


def refine_channel(
    y: RxFrame,
    frame: TxFrame,
    x_hat: np.ndarray,
    estimator: str,
    snr_h: float,
    hard: bool = True,
) -> ChannelEstimate:
    """Stage-3 channel re-estimation at data cells from demodulated symbols.

    Pilot cells are reset to the Stage-1 reciprocal-filter values, so the
    pilot part of the estimate is never contaminated by decision errors.
    For unit-modulus alphabets with hard decisions, division by a symbol
    equals multiplication by its conjugate, so RF takes the MF code path
    (the two estimators are then identical, bit for bit).
    """
    mask_p = frame.pilots.mask
    d = ~mask_p
    h = np.zeros_like(y.y)
    if frame.pilots.count:
        h[mask_p] = y.y[mask_p] / frame.x[mask_p]
    yd = y.y[d]
    xd = x_hat[d]
    if estimator == "MF" or (estimator == "RF" and hard and frame.constellation.unit_modulus):
        h[d] = yd * np.conj(xd)
    elif estimator == "RF":
        if xd.size and np.min(np.abs(xd)) < 1e-12:
            raise ValueError("reciprocal filter with near-zero demodulated symbol")
        h[d] = yd / xd
    elif estimator == "LMMSE":
        inv_snr = 0.0 if np.isinf(snr_h) else 1.0 / snr_h
        den = np.abs(xd) ** 2 + inv_snr
        num = yd * np.conj(xd)
        h[d] = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    else:
        raise ValueError(f"unknown estimator {estimator!r}")
    return ChannelEstimate(h_hat=h, pilot_set=frame.pilots)


def _genie_estimate(y: RxFrame, frame: TxFrame, snr_h: float) -> ChannelEstimate:
    """Stage-1 pilot values plus LMMSE refinement with the true data."""
    mask_p = frame.pilots.mask
    d = ~mask_p
    h = np.zeros_like(y.y)
    if frame.pilots.count:
        h[mask_p] = y.y[mask_p] / frame.x[mask_p]
    inv_snr = 0.0 if np.isinf(snr_h) else 1.0 / snr_h
    xd = frame.x[d]
    den = np.abs(xd) ** 2 + inv_snr
    num = y.y[d] * np.conj(xd)
    h[d] = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return ChannelEstimate(h_hat=h, pilot_set=frame.pilots)


def run_pipeline(
    y: RxFrame,
    frame: TxFrame,
    cfg: ReceiverConfig,
    detector_cfg: CfarConfig,
    collect_debug: bool = False,
) -> PipelineOutput:
    """Execute the configured receiver scheme end to end.

    data_aided: Stage 1 (pilot estimate, image, CFAR, LS gains, structured
    reconstruction), then ``max_iterations`` demod+refine passes, each
    followed by detection on the combined estimate.  If Stage-1 CFAR
    returns nothing, the pilot-only output is returned unchanged rather
    than demodulating against a zero channel.
    """
    debug: dict | None = {} if collect_debug else None

    if cfg.scheme == "pilot_only":
        est = stage1_pilot_estimate(y, frame)
        img = delay_doppler_image(est)
        dets = cfar_2d(img, detector_cfg)
        if debug is not None:
            debug["h_stage1"] = est.h_hat
            debug["image_stage1"] = img
        return PipelineOutput(h_hat_final=est, detections=dets, x_hat=None,
                              per_iteration=[], stage1_detections=dets, debug=debug)

    if cfg.scheme == "genie":
        est = _genie_estimate(y, frame, cfg.snr_h)
        img = delay_doppler_image(est)
        dets = cfar_2d(img, detector_cfg)
        x_hat = np.where(frame.pilots.mask, 0.0, frame.x)
        if debug is not None:
            debug["h_final"] = est.h_hat
            debug["image_final"] = img
        return PipelineOutput(h_hat_final=est, detections=dets, x_hat=x_hat,
                              per_iteration=[dets], stage1_detections=None, debug=debug)

    # data_aided
    est1 = stage1_pilot_estimate(y, frame)
    img1 = delay_doppler_image(est1)
    dets1 = cfar_2d(img1, detector_cfg)
    if debug is not None:
        debug["h_stage1"] = est1.h_hat
        debug["image_stage1"] = img1
    if len(dets1) == 0:
        # Nothing to reconstruct: fall back to the pilot-only output.
        return PipelineOutput(h_hat_final=est1, detections=dets1, x_hat=None,
                              per_iteration=[], stage1_detections=dets1, debug=debug)

    gains1 = ls_gains(est1, dets1)
    est_cur = reconstruct_channel(gains1, dets1, frame.pilots)
    if debug is not None:
        debug["h_reconstructed"] = est_cur.h_hat

    d = frame.data_mask
    per_iteration: list[DetectionList] = []
    x_hat_grid: np.ndarray | None = None
    est_ref = est_cur
    for it in range(cfg.max_iterations):
        soft = lmmse_demod(y, est_cur, cfg.snr_x)
        if cfg.hard_decisions:
            sliced, _bits = demap_hard(soft[d], frame.constellation)
            x_hat_grid = np.zeros_like(soft)
            x_hat_grid[d] = sliced
        else:
            x_hat_grid = soft
        est_ref = refine_channel(y, frame, x_hat_grid, cfg.estimator,
                                 cfg.snr_h, cfg.hard_decisions)
        img_it = delay_doppler_image(est_ref)
        per_iteration.append(cfar_2d(img_it, detector_cfg))
        est_cur = est_ref
        if debug is not None:
            debug[f"h_refined_{it + 1}"] = est_ref.h_hat
            debug[f"image_refined_{it + 1}"] = img_it

    return PipelineOutput(h_hat_final=est_ref, detections=per_iteration[-1],
                          x_hat=x_hat_grid, per_iteration=per_iteration,
                          stage1_detections=dets1, debug=debug)
