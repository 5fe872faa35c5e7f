"""Hjorth parameters and Higuchi fractal dimension."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from anxeeg.errors import DegenerateSignalError, DegenerateSignalWarning, FeatureError
from anxeeg.features.vector import FeatureVector
from anxeeg.recording import EEG_CHANNELS


@dataclass(frozen=True)
class HjorthParams:
    activity: float
    mobility: float
    complexity: float


def hjorth(x, classical: bool = False) -> HjorthParams:
    """Activity, mobility and complexity of a sampled series.

    By default the moment-ratio forms are used literally: activity is the
    mean square, mobility the ratio of the mean-square first difference to
    the mean-square signal, and complexity
    ``sqrt(ms(ddx)/ms(dx) - ms(dx)/ms(x))``. With ``classical=True`` the
    textbook definitions (variances, square-root mobility, complexity as the
    mobility of the derivative over the mobility of the signal) are used.

    The literal complexity radicand can dip below zero for near-pure tones;
    it is clamped to 0 with a :class:`DegenerateSignalWarning`.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 3:
        raise FeatureError("hjorth needs a 1-D series of at least 3 samples")
    dx = np.diff(x)
    ddx = np.diff(dx)
    if classical:
        v0, v1, v2 = np.var(x), np.var(dx), np.var(ddx)
        if v0 == 0:
            raise DegenerateSignalError("degenerate signal (zero activity)")
        if v1 == 0:
            raise DegenerateSignalError("degenerate signal (zero first-difference variance)")
        mobility = np.sqrt(v1 / v0)
        return HjorthParams(float(v0), float(mobility), float(np.sqrt(v2 / v1) / mobility))

    m0 = np.mean(x * x)
    m1 = np.mean(dx * dx)
    m2 = np.mean(ddx * ddx)
    if m0 == 0:
        raise DegenerateSignalError("degenerate signal (zero activity)")
    if m1 == 0:
        raise DegenerateSignalError("degenerate signal (constant: zero first differences)")
    mobility = m1 / m0
    radicand = m2 / m1 - mobility
    if radicand < 0:
        warnings.warn(f"complexity radicand {radicand:.3g} < 0 clamped to 0",
                      DegenerateSignalWarning, stacklevel=2)
        radicand = 0.0
    return HjorthParams(float(m0), float(mobility), float(np.sqrt(radicand)))


def hjorth_vector(data: np.ndarray, channels=EEG_CHANNELS, classical: bool = False) -> FeatureVector:
    """[activity, mobility, complexity] per channel, 42 values for the montage."""
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] != len(EEG_CHANNELS):
        raise FeatureError(f"expected {len(EEG_CHANNELS)} channels, got "
                           f"{data.shape[0] if data.ndim == 2 else data.ndim}")
    names, values = [], []
    for name, x in zip(channels, data):
        try:
            p = hjorth(x, classical=classical)
        except (DegenerateSignalError, FeatureError) as exc:
            raise type(exc)(f"channel {name}: {exc}") from exc
        names += [f"hjorth_activity_{name}", f"hjorth_mobility_{name}",
                  f"hjorth_complexity_{name}"]
        values += [p.activity, p.mobility, p.complexity]
    return FeatureVector(tuple(names), np.array(values), "time", "hjorth")


@dataclass(frozen=True)
class HiguchiConfig:
    k_max: int = 8

    def __post_init__(self) -> None:
        if self.k_max < 2:
            raise FeatureError("k_max must be >= 2")

    @classmethod
    def for_length(cls, n: int, sample_rate: float = 128.0) -> "HiguchiConfig":
        return cls(8 if n < 5 * sample_rate else 16)


def higuchi_curve_lengths(x: np.ndarray, k_max: int) -> np.ndarray:
    """Mean normalised curve length L(k) for k = 1..k_max."""
    n = x.shape[0]
    lengths = np.empty(k_max)
    for k in range(1, k_max + 1):
        per_offset = []
        for m in range(1, k + 1):
            # 1-based offsets m, m+k, ..., m+floor((N-m)/k)*k
            count = (n - m) // k
            if count < 1:
                continue
            sub = x[m - 1::k][:count + 1]
            norm = (n - 1) / (count * k)
            per_offset.append(np.sum(np.abs(np.diff(sub))) * norm / k)
        lengths[k - 1] = np.mean(per_offset)
    return lengths


def higuchi_fd(x, cfg: HiguchiConfig = HiguchiConfig()) -> float:
    """Negated least-squares slope of ln L(k) against ln k."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 2 * cfg.k_max:
        raise FeatureError(f"series of {x.shape[0]} samples too short for k_max={cfg.k_max}")
    lengths = higuchi_curve_lengths(x, cfg.k_max)
    if np.any(lengths <= 0):
        raise DegenerateSignalError("degenerate signal (zero curve length, log undefined)")
    k = np.arange(1, cfg.k_max + 1, dtype=np.float64)
    slope = np.polyfit(np.log(k), np.log(lengths), 1)[0]
    return float(-slope)


def fd_vector(data: np.ndarray, channels=EEG_CHANNELS,
              cfg: HiguchiConfig | None = None, sample_rate: float = 128.0) -> FeatureVector:
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] != len(EEG_CHANNELS):
        raise FeatureError(f"expected {len(EEG_CHANNELS)} channels")
    cfg = cfg or HiguchiConfig.for_length(data.shape[1], sample_rate)
    values = []
    for name, x in zip(channels, data):
        try:
            values.append(higuchi_fd(x, cfg))
        except (DegenerateSignalError, FeatureError) as exc:
            raise type(exc)(f"channel {name}: {exc}") from exc
    return FeatureVector(tuple(f"fd_{c}" for c in channels), np.array(values), "time", "fd")
