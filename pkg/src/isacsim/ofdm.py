"""Frequency-time grid bookkeeping: pilots, constellations, TX frame assembly.

The grid is an N x M complex matrix (subcarrier-major).  Pilots are
unit-amplitude symbols at a random, fixed subset of cells; data cells
carry Gray-mapped constellation points with unit average energy.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .scenario import round_half_away

CONSTELLATION_ORDERS = {
    "QPSK": 4,
    "16QAM": 16,
    "64QAM": 64,
    "256QAM": 256,
    "1024QAM": 1024,
}


def _binary_to_gray(i: int) -> int:
    return i ^ (i >> 1)


@dataclass(frozen=True)
class Constellation:
    """Unit-average-energy square constellation with Gray labeling.

    ``points[label]`` is the symbol whose bit pattern equals ``label``;
    the first half of the bits indexes the I axis, the second half the Q
    axis (MSB first).  ``pam`` holds the normalized per-axis amplitudes
    indexed by the per-axis Gray label.
    """

    name: str
    points: np.ndarray
    bits_per_symbol: int
    pam: np.ndarray

    @property
    def order(self) -> int:
        return self.points.size

    @property
    def half_bits(self) -> int:
        return self.bits_per_symbol // 2

    @property
    def unit_modulus(self) -> bool:
        """True when every point sits on the unit circle (e.g. QPSK)."""
        return bool(np.max(np.abs(np.abs(self.points) - 1.0)) < 1e-12)

    def map_bits(self, bits: np.ndarray) -> np.ndarray:
        """Gray-map a flat bit vector to symbols; length must divide evenly."""
        bits = np.asarray(bits, dtype=np.int64)
        if bits.size % self.bits_per_symbol != 0:
            raise ValueError(
                f"bit count {bits.size} not a multiple of {self.bits_per_symbol}"
            )
        groups = bits.reshape(-1, self.bits_per_symbol)
        weights = 1 << np.arange(self.bits_per_symbol - 1, -1, -1)
        labels = groups @ weights
        return self.points[labels]

    def labels_to_bits(self, labels: np.ndarray) -> np.ndarray:
        labels = np.asarray(labels, dtype=np.int64)
        shifts = np.arange(self.bits_per_symbol - 1, -1, -1)
        return ((labels[:, None] >> shifts) & 1).reshape(-1)


@lru_cache(maxsize=None)
def make_constellation(name: str) -> Constellation:
    """Build one of the supported square constellations by name."""
    if name not in CONSTELLATION_ORDERS:
        raise ValueError(f"unsupported constellation {name!r}")
    order = CONSTELLATION_ORDERS[name]
    bits = int(np.log2(order))
    half = bits // 2
    levels = 1 << half
    # Amplitudes decrease with the natural level index so the all-zeros
    # label lands on the positive corner; Gray-coding the index makes
    # neighbouring amplitudes differ in one bit.
    pam = np.empty(levels, dtype=float)
    for idx in range(levels):
        pam[_binary_to_gray(idx)] = (levels - 1) - 2 * idx
    scale = np.sqrt(2.0 * (order - 1) / 3.0)
    pam /= scale
    labels = np.arange(order)
    points = pam[labels >> half] + 1j * pam[labels & (levels - 1)]
    return Constellation(name=name, points=points, bits_per_symbol=bits, pam=pam)


@dataclass(frozen=True)
class PilotPattern:
    """Random pilot placement: flat cell indices into the (N, M) grid.

    Flat indices are column-major (subcarrier index fastest), matching the
    vec() convention used by the receiver's least-squares gain step.
    """

    n_subc: int
    n_sym: int
    rho: float                  # pilot percentage of the grid
    flat_indices: np.ndarray    # sorted, unique, column-major

    @property
    def count(self) -> int:
        return self.flat_indices.size

    @property
    def mask(self) -> np.ndarray:
        """Boolean (N, M) pilot mask."""
        m = np.zeros(self.n_subc * self.n_sym, dtype=bool)
        m[self.flat_indices] = True
        return m.reshape((self.n_sym, self.n_subc)).T

    @property
    def pairs(self) -> np.ndarray:
        """(count, 2) array of (subcarrier, symbol) index pairs."""
        sub = self.flat_indices % self.n_subc
        sym = self.flat_indices // self.n_subc
        return np.stack([sub, sym], axis=1)


def generate_pilot_pattern(n: int, m: int, rho: float, seed: int) -> PilotPattern:
    """Uniformly random pilot subset of size round(rho*N*M/100).

    Reproducible from the seed; for a fixed seed the patterns are nested
    across rho (a prefix of one seed-determined permutation), so sweeping
    the pilot percentage only adds or removes cells.
    """
    if not 0.0 <= rho <= 100.0:
        raise ValueError("rho must be in [0, 100]")
    total = n * m
    k = round_half_away(rho * total / 100.0)
    rng = np.random.default_rng([int(seed), 0x9110])
    perm = rng.permutation(total)
    flat = np.sort(perm[:k]).astype(np.int64)
    return PilotPattern(n_subc=n, n_sym=m, rho=rho, flat_indices=flat)


def export_pilot_csv(pattern: PilotPattern, path: str) -> None:
    """Dump the pilot cell list as (subcarrier, symbol) rows."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["subcarrier", "symbol"])
        for sub, sym in pattern.pairs:
            w.writerow([int(sub), int(sym)])


@dataclass(frozen=True)
class TxFrame:
    """Transmit grid with its pilot pattern, constellation and payload."""

    x: np.ndarray               # (N, M) complex
    pilots: PilotPattern
    constellation: Constellation
    payload_bits: np.ndarray

    @property
    def data_mask(self) -> np.ndarray:
        return ~self.pilots.mask

    @property
    def x_pilots(self) -> np.ndarray:
        """Pilot symbols in flat (column-major) pilot order."""
        return self.x.T.reshape(-1)[self.pilots.flat_indices]


def build_tx_frame(
    pilots: PilotPattern,
    constellation: Constellation,
    bits: np.ndarray | int,
    pilot_seed: int = 0,
) -> TxFrame:
    """Assemble the TX grid: random unit-modulus pilots + Gray-mapped data.

    ``bits`` is either the payload bit vector (length |D| * bits_per_symbol)
    or an integer seed from which the payload is drawn.
    """
    n, m = pilots.n_subc, pilots.n_sym
    total = n * m
    n_data = total - pilots.count
    if isinstance(bits, (int, np.integer)):
        rng = np.random.default_rng([int(bits), 0xB175])
        payload = rng.integers(0, 2, size=n_data * constellation.bits_per_symbol)
    else:
        payload = np.asarray(bits, dtype=np.int64)
        if payload.size != n_data * constellation.bits_per_symbol:
            raise ValueError(
                f"payload length {payload.size} != "
                f"{n_data} data cells * {constellation.bits_per_symbol} bits"
            )

    flat = np.zeros(total, dtype=np.complex128)
    # Pilots: pseudo-random unit-modulus QPSK-like phases, fixed by seed.
    prng = np.random.default_rng([int(pilot_seed), 0x5107])
    quadrant = prng.integers(0, 4, size=pilots.count)
    flat[pilots.flat_indices] = np.exp(1j * (np.pi / 4.0 + np.pi / 2.0 * quadrant))

    data_mask_flat = np.ones(total, dtype=bool)
    data_mask_flat[pilots.flat_indices] = False
    if n_data:
        flat[data_mask_flat] = constellation.map_bits(payload)

    x = flat.reshape((m, n)).T
    return TxFrame(x=x, pilots=pilots, constellation=constellation, payload_bits=payload)


def demap_hard(symbols: np.ndarray, constellation: Constellation) -> tuple[np.ndarray, np.ndarray]:
    """Slice to the nearest constellation point and recover the Gray bits.

    Square constellations decompose into independent per-axis PAM
    decisions, which is exact and avoids an O(len * order) search.  Ties
    on a decision boundary break toward the smaller label index (argmin
    returns the first minimum).
    """
    s = np.asarray(symbols, dtype=np.complex128).reshape(-1)
    pam = constellation.pam
    li = np.argmin(np.abs(s.real[:, None] - pam[None, :]), axis=1)
    lq = np.argmin(np.abs(s.imag[:, None] - pam[None, :]), axis=1)
    labels = (li << constellation.half_bits) | lq
    sliced = constellation.points[labels].reshape(np.shape(symbols))
    return sliced, constellation.labels_to_bits(labels)
