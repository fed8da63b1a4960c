"""Gaussian Low/Medium/High partitions and 120-wide window signatures.

Signature layout, oldest cycle first, six degrees per cycle::

    [HI-Low, HI-Med, HI-High, dHI-Low, dHI-Med, dHI-High] x L cycles

so position ``p`` decodes to cycle offset ``p // 6``, feature
``(p % 6) // 3`` (0 = HI, 1 = dHI) and label ``p % 3``. Degrees are raw
Gaussian values; triples are not renormalised to sum to one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

LABELS = ("Low", "Medium", "High")
FEATURES = ("HI", "dHI")
WINDOW_LENGTH = 20
TERMS_PER_CYCLE = len(FEATURES) * len(LABELS)


@dataclass(frozen=True)
class FuzzyPartition:
    feature: str
    centers: tuple[float, float, float]
    sigma: float
    labels: tuple[str, str, str] = LABELS

    def __post_init__(self):
        c = self.centers
        if not (c[0] < c[1] < c[2]):
            raise ValueError(f"partition centers must be strictly increasing, got {c}")
        if not self.sigma > 0:
            raise ValueError("partition sigma must be positive")

    def to_dict(self) -> dict:
        return {"feature": self.feature, "centers": list(self.centers), "sigma": self.sigma}

    @classmethod
    def from_dict(cls, d: dict) -> "FuzzyPartition":
        return cls(feature=d["feature"], centers=tuple(d["centers"]), sigma=d["sigma"])


def make_uniform_partition(lo: float, hi: float, feature: str = "HI") -> FuzzyPartition:
    """Three equally spaced terms on [lo, hi] with sigma at half the half-range."""
    if not lo < hi:
        raise ValueError(f"partition range must satisfy lo < hi, got ({lo}, {hi})")
    return FuzzyPartition(
        feature=feature,
        centers=(float(lo), (lo + hi) / 2.0, float(hi)),
        sigma=0.5 * (hi - lo) / 2.0,
    )


def membership(x, partition: FuzzyPartition) -> np.ndarray:
    """Degrees (Low, Medium, High) of ``x``; shape ``x.shape + (3,)``."""
    x = np.asarray(x, dtype=float)[..., None]
    c = np.asarray(partition.centers)
    return np.exp(-((x - c) ** 2) / (2.0 * partition.sigma**2))


@dataclass(frozen=True, eq=False)
class FuzzySignature:
    values: np.ndarray
    run_id: int | None = None
    cycle_index: int | None = None
    rul: int | None = None

    def __len__(self) -> int:
        return len(self.values)


def encode_window(hi, dhi, hi_partition: FuzzyPartition, dhi_partition: FuzzyPartition) -> np.ndarray:
    """Encode aligned HI/dHI sequences (oldest first) into a flat degree vector."""
    hi = np.asarray(hi, dtype=float)
    dhi = np.asarray(dhi, dtype=float)
    if hi.shape != dhi.shape:
        raise ValueError("hi and dhi windows must have the same length")
    block = np.concatenate([membership(hi, hi_partition), membership(dhi, dhi_partition)], axis=-1)
    return block.reshape(*hi.shape[:-1], -1)


def encode_signature(
    window: Sequence[tuple[float, float]],
    hi_partition: FuzzyPartition,
    dhi_partition: FuzzyPartition,
    *,
    window_length: int = WINDOW_LENGTH,
    run_id: int | None = None,
    cycle_index: int | None = None,
    rul: int | None = None,
) -> FuzzySignature:
    pairs = np.asarray(window, dtype=float).reshape(-1, 2)
    if len(pairs) != window_length:
        raise ValueError(f"window must hold exactly {window_length} cycles, got {len(pairs)}")
    values = encode_window(pairs[:, 0], pairs[:, 1], hi_partition, dhi_partition)
    return FuzzySignature(values=values, run_id=run_id, cycle_index=cycle_index, rul=rul)


def decode_position(p: int) -> tuple[int, str, str]:
    """Map a signature position to (cycle offset from oldest, feature, label)."""
    return p // TERMS_PER_CYCLE, FEATURES[(p % TERMS_PER_CYCLE) // 3], LABELS[p % 3]


def sliding_signatures(hi, dhi, hi_partition, dhi_partition, window_length: int = WINDOW_LENGTH) -> np.ndarray:
    """Signatures for every cycle with a full window of history.

    Row ``i`` encodes cycles ``i .. i + window_length - 1``, i.e. the query
    cycle ``t = i + window_length - 1``. Returns shape ``(n - L + 1, 6 L)``.
    """
    hi = np.asarray(hi, dtype=float)
    dhi = np.asarray(dhi, dtype=float)
    n = len(hi)
    if n < window_length:
        return np.empty((0, TERMS_PER_CYCLE * window_length))
    per_cycle = encode_window(hi[:, None], dhi[:, None], hi_partition, dhi_partition)
    windows = np.lib.stride_tricks.sliding_window_view(per_cycle, window_length, axis=0)
    # sliding_window_view puts the window axis last: (n-L+1, 6, L)
    return np.ascontiguousarray(windows.transpose(0, 2, 1).reshape(n - window_length + 1, -1))
