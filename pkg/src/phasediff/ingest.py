"""Normalization of raw oscilloscope pulse-area data into signal units.

Raw areas are opaque (only differences and ratios enter); the reference
holds the dark-signal origin, the single-arm pulse area, and the
delay-line insertion loss in dB.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class NormalizationRef:
    """Dark origin, single-arm pulse area, and insertion loss."""

    s_zero: float      # dark-signal area
    s_0: float         # single-arm pulse area, same units
    alpha_db: float = 0.0

    def __post_init__(self):
        if not self.s_0 > self.s_zero:
            raise ValueError("s_0 must exceed s_zero")
        if self.alpha_db < 0:
            raise ValueError("alpha_db must be >= 0")

    @classmethod
    def from_json(cls, path: str | Path) -> "NormalizationRef":
        raw = json.loads(Path(path).read_text())
        try:
            return cls(s_zero=float(raw["s_zero"]), s_0=float(raw["s_0"]),
                       alpha_db=float(raw.get("alpha_db", 0.0)))
        except KeyError as missing:
            raise ValueError(f"normalization reference lacks {missing}") from None


def normalize(x, ref: NormalizationRef):
    """Map raw areas to signal units: 10^(alpha/10) (x - s_zero)/(s_0 - s_zero)."""
    x = np.asarray(x, dtype=float)
    out = 10.0 ** (ref.alpha_db / 10.0) * (x - ref.s_zero) / (ref.s_0 - ref.s_zero)
    return out if out.ndim else float(out)


def denormalize(s, ref: NormalizationRef):
    """Inverse of :func:`normalize`."""
    s = np.asarray(s, dtype=float)
    out = s * (ref.s_0 - ref.s_zero) * 10.0 ** (-ref.alpha_db / 10.0) + ref.s_zero
    return out if out.ndim else float(out)


def insertion_loss(s_0: float, s_delay: float, s_zero: float) -> float:
    """Delay-line insertion loss 10 log10[(s_0 - s_zero) / (2 (s_delay - s_zero))]."""
    if not (s_delay > s_zero and s_0 > s_zero):
        raise ValueError("pulse areas must exceed the dark signal")
    return 10.0 * math.log10((s_0 - s_zero) / (2.0 * (s_delay - s_zero)))


@dataclass
class Histogram:
    """Binned signal counts; bin centers in raw or normalized units."""

    bin_centers: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        self.bin_centers = np.asarray(self.bin_centers, dtype=float)
        self.counts = np.asarray(self.counts, dtype=float)
        if self.bin_centers.ndim != 1 or self.bin_centers.shape != self.counts.shape:
            raise ValueError("centers and counts must be matching 1-d arrays")
        if self.bin_centers.size == 0:
            raise ValueError("histogram is empty")
        if np.any(np.diff(self.bin_centers) <= 0):
            raise ValueError("bin centers must be strictly increasing")
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")

    @property
    def total(self) -> float:
        return float(np.sum(self.counts))


_VALUE_HEADERS = ("value", "bin_center")


def load_histogram(path: str | Path,
                   ref: NormalizationRef | str | Path | None = None) -> Histogram:
    """Load a (value|bin_center, count) CSV, optionally normalizing centers.

    ``ref`` may be a NormalizationRef or a path to its JSON sidecar. Total
    count is preserved; only the abscissa transforms.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise ValueError(f"{path}: empty histogram file")
    header = [c.strip().lower() for c in rows[0]]
    if len(header) < 2 or header[0] not in _VALUE_HEADERS or header[1] != "count":
        raise ValueError(
            f"{path}: expected header (value|bin_center, count), got {rows[0]}")
    centers = []
    counts = []
    for lineno, row in enumerate(rows[1:], start=2):
        try:
            centers.append(float(row[0]))
            counts.append(float(row[1]))
        except (ValueError, IndexError):
            raise ValueError(f"{path}:{lineno}: malformed row {row}") from None
    if not centers:
        raise ValueError(f"{path}: no data rows")
    hist = Histogram(np.asarray(centers), np.asarray(counts))
    if ref is not None:
        if not isinstance(ref, NormalizationRef):
            ref = NormalizationRef.from_json(ref)
        hist = Histogram(normalize(hist.bin_centers, ref), hist.counts)
    return hist
