"""Daubechies-5 pyramid DWT, band power / RMS features and alpha asymmetry.

Coefficient layout and the ``symmetric`` border mode follow the common
convention (half-sample symmetric extension, ``floor((N + L - 1) / 2)``
coefficients per level), so results line up with other wavelet toolboxes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from anxeeg.errors import DegenerateSignalError, FeatureError
from anxeeg.features.vector import FeatureVector
from anxeeg.recording import EEG_CHANNELS, HEMISPHERE_PAIRS

# db5 analysis low-pass filter.
DB5_DEC_LO = np.array([
    0.0033357252854737712,
    -0.012580751999081999,
    -0.006241490212798274,
    0.07757149384004572,
    -0.032244869584638375,
    -0.24229488706638203,
    0.13842814590132074,
    0.7243085284377729,
    0.6038292697971896,
    0.16010239797419293,
])


def _qmf(lo: np.ndarray) -> np.ndarray:
    n = lo.shape[0]
    return np.array([(-1) ** (j + 1) * lo[n - 1 - j] for j in range(n)])


DB5_DEC_HI = _qmf(DB5_DEC_LO)

WAVELETS = {"db5": (DB5_DEC_LO, DB5_DEC_HI)}
MODES = ("symmetric", "periodization")
BANDS = ("theta", "alpha", "beta", "gamma")


def _symmetric_index(idx: np.ndarray, n: int) -> np.ndarray:
    r = np.mod(idx, 2 * n)
    return np.where(r >= n, 2 * n - 1 - r, r)


def dwt_step(x: np.ndarray, mode: str = "symmetric",
             wavelet: str = "db5") -> tuple[np.ndarray, np.ndarray]:
    """One analysis level along the last axis: ``(approximation, detail)``."""
    lo, hi = WAVELETS[wavelet]
    L = lo.shape[0]
    n = x.shape[-1]
    j = np.arange(L)
    if mode == "symmetric":
        k = np.arange((n + L - 1) // 2)
        idx = _symmetric_index(2 * k[:, None] + 1 - j[None, :], n)
    elif mode == "periodization":
        if n % 2:
            x = np.concatenate([x, x[..., -1:]], axis=-1)
            n += 1
        k = np.arange(n // 2)
        idx = np.mod(2 * k[:, None] + L // 2 - j[None, :], n)
    else:
        raise FeatureError(f"unknown border mode {mode!r}")
    windows = x[..., idx]
    return windows @ lo, windows @ hi


def idwt_step(approx: np.ndarray, detail: np.ndarray, n: int,
              mode: str = "symmetric", wavelet: str = "db5") -> np.ndarray:
    """Inverse of :func:`dwt_step`, returning ``n`` samples."""
    lo, hi = WAVELETS[wavelet]
    L = lo.shape[0]
    nc = approx.shape[-1]
    out_len = n + (n % 2) if mode == "periodization" else n
    out = np.zeros(approx.shape[:-1] + (out_len,))
    k = np.arange(nc)
    shift = L // 2 if mode == "periodization" else 1
    for j in range(L):
        m = 2 * k + shift - j
        contrib = approx * lo[j] + detail * hi[j]
        if mode == "periodization":
            out[..., np.mod(m, out_len)] += contrib
        else:
            ok = (m >= 0) & (m < n)
            out[..., m[ok]] += contrib[..., ok]
    return out[..., :n]


@dataclass(frozen=True)
class WaveletDecomposition:
    """``details[0]`` is D1 (finest); ``approx`` is the deepest approximation.

    Arrays carry any leading (channel) axes of the input.
    """

    details: tuple[np.ndarray, ...]
    approx: np.ndarray
    lengths: tuple[int, ...]
    wavelet: str = "db5"
    mode: str = "symmetric"

    @property
    def levels(self) -> int:
        return len(self.details)

    def detail(self, level: int) -> np.ndarray:
        if not 1 <= level <= self.levels:
            raise FeatureError(f"no detail level D{level}")
        return self.details[level - 1]

    def coefficient_energies(self) -> np.ndarray:
        """Energy per level ordered D1..Dn, An; shape (levels + 1, ...)."""
        parts = [np.sum(d * d, axis=-1) for d in self.details]
        parts.append(np.sum(self.approx * self.approx, axis=-1))
        return np.array(parts)


def dwt(x, levels: int = 5, wavelet: str = "db5", mode: str = "symmetric") -> WaveletDecomposition:
    x = np.asarray(x, dtype=np.float64)
    if wavelet not in WAVELETS:
        raise FeatureError(f"unsupported wavelet {wavelet!r}")
    L = WAVELETS[wavelet][0].shape[0]
    if x.shape[-1] < 2 ** levels:
        raise FeatureError(f"signal of {x.shape[-1]} samples shorter than 2^{levels}")
    details, lengths = [], []
    a = x
    for level in range(1, levels + 1):
        if mode == "symmetric" and a.shape[-1] < L:
            raise FeatureError(
                f"signal too short: level {level} input has {a.shape[-1]} samples "
                f"for a {L}-tap filter"
            )
        lengths.append(a.shape[-1])
        a, d = dwt_step(a, mode, wavelet)
        details.append(d)
    return WaveletDecomposition(tuple(details), a, tuple(lengths), wavelet, mode)


def idwt(dec: WaveletDecomposition) -> np.ndarray:
    a = dec.approx
    for level in range(dec.levels, 0, -1):
        a = idwt_step(a, dec.details[level - 1], dec.lengths[level - 1], dec.mode, dec.wavelet)
    return a


@dataclass(frozen=True)
class BandMap:
    """Frequency band name to decomposition level (``0`` = deepest approximation)."""

    levels: Mapping[str, int]

    @classmethod
    def table(cls) -> "BandMap":
        """Band/level pairing of the reference decomposition table."""
        return cls({"delta": 0, "theta": 5, "alpha": 4, "beta": 3, "gamma": 2})

    @classmethod
    def for_rate(cls, sample_rate: float, levels: int = 5) -> "BandMap":
        """Pair each band with the dyadic detail level containing its centre.

        Level ``j`` spans ``[fs / 2^(j+1), fs / 2^j]``.
        """
        centres = {"theta": 6.0, "alpha": 10.5, "beta": 22.5, "gamma": 48.0}
        out = {"delta": 0}
        for band, f in centres.items():
            j = int(np.floor(np.log2(sample_rate / f)))
            out[band] = min(max(j, 1), levels)
        return cls(out)

    def level(self, band: str) -> int:
        try:
            return self.levels[band]
        except KeyError:
            raise FeatureError(f"unmapped band {band!r}") from None


DEFAULT_BAND_MAP = BandMap.table()


def _band_coefficients(dec: WaveletDecomposition, band: str, band_map: BandMap) -> np.ndarray:
    level = band_map.level(band)
    return dec.approx if level == 0 else dec.detail(level)


def band_power(dec: WaveletDecomposition, band: str,
               band_map: BandMap = DEFAULT_BAND_MAP) -> np.ndarray:
    """Mean squared coefficient of the band's level (per leading axis)."""
    c = _band_coefficients(dec, band, band_map)
    return np.mean(c * c, axis=-1)


def rms_per_band(dec: WaveletDecomposition, band: str,
                 band_map: BandMap = DEFAULT_BAND_MAP, cumulative: bool = True) -> np.ndarray:
    """Root mean square of detail coefficients.

    The cumulative form pools D1..Dj for a band mapped to level j:
    ``sqrt(sum_i sum_n D_i(n)^2 / sum_i n_i)``. ``cumulative=False`` uses
    Dj alone.
    """
    level = band_map.level(band)
    if level == 0:
        raise FeatureError(f"band {band!r} maps to the approximation; RMS is over details")
    if not cumulative:
        d = dec.detail(level)
        return np.sqrt(np.mean(d * d, axis=-1))
    sq = sum(np.sum(dec.detail(i) ** 2, axis=-1) for i in range(1, level + 1))
    count = sum(dec.detail(i).shape[-1] for i in range(1, level + 1))
    return np.sqrt(sq / count)


def _per_channel_bands(values: dict[str, np.ndarray], prefix: str, family: str,
                       channels: Sequence[str]) -> FeatureVector:
    names, out = [], []
    for ci, ch in enumerate(channels):
        for band in values:
            names.append(f"{prefix}_{band}_{ch}")
            out.append(values[band][ci])
    return FeatureVector(tuple(names), np.array(out), "time_frequency", family)


def _check_montage(data: np.ndarray) -> None:
    if data.ndim != 2 or data.shape[0] != len(EEG_CHANNELS):
        raise FeatureError(f"expected {len(EEG_CHANNELS)} channels")


def dwt_power_vector(data: np.ndarray, channels=EEG_CHANNELS,
                     band_map: BandMap = DEFAULT_BAND_MAP, bands=BANDS) -> FeatureVector:
    """Band power for 4 bands x 14 channels (56 values)."""
    data = np.asarray(data, dtype=np.float64)
    _check_montage(data)
    dec = dwt(data)
    return _per_channel_bands({b: band_power(dec, b, band_map) for b in bands},
                              "dwt_power", "power", channels)


def dwt_rms_vector(data: np.ndarray, channels=EEG_CHANNELS,
                   band_map: BandMap = DEFAULT_BAND_MAP, cumulative: bool = True,
                   bands=BANDS) -> FeatureVector:
    data = np.asarray(data, dtype=np.float64)
    _check_montage(data)
    dec = dwt(data)
    return _per_channel_bands(
        {b: rms_per_band(dec, b, band_map, cumulative) for b in bands},
        "dwt_rms", "rms", channels,
    )


def dwt_approx_power_vector(data: np.ndarray, channels=EEG_CHANNELS) -> FeatureVector:
    """Deepest-approximation (A5, nominal delta) power per channel."""
    data = np.asarray(data, dtype=np.float64)
    _check_montage(data)
    dec = dwt(data)
    values = np.mean(dec.approx ** 2, axis=-1)
    return FeatureVector(tuple(f"dwt_power_delta_{c}" for c in channels), values,
                         "time_frequency", "approx_power")


def epochs(n: int, width: int, overlap: float = 0.5) -> list[tuple[int, int]]:
    """Start/stop pairs of overlapping windows; a short series is one window."""
    if n <= width:
        return [(0, n)]
    step = max(1, int(round(width * (1.0 - overlap))))
    return [(s, s + width) for s in range(0, n - width + 1, step)]


def asymmetry_index(data: np.ndarray, sample_rate: float = 128.0, channels=EEG_CHANNELS,
                    pairs=HEMISPHERE_PAIRS, epoch_seconds: float = 1.0, overlap: float = 0.5,
                    band_map: BandMap = DEFAULT_BAND_MAP) -> FeatureVector:
    """Mean over epochs of ln(alpha power, left) - ln(alpha power, right)."""
    data = np.asarray(data, dtype=np.float64)
    if not 1.0 <= epoch_seconds <= 2.0:
        raise FeatureError("asymmetry epochs must last 1-2 s")
    channels = tuple(channels)
    for left, right in pairs:
        if left not in channels or right not in channels:
            raise FeatureError(f"pair ({left}, {right}) not in trial channels")
    width = int(round(epoch_seconds * sample_rate))
    windows = epochs(data.shape[-1], width, overlap)
    log_power = []
    for e, (start, stop) in enumerate(windows):
        p = band_power(dwt(data[:, start:stop]), "alpha", band_map)
        zero = np.flatnonzero(p <= 0)
        if zero.size:
            raise DegenerateSignalError(
                f"zero alpha power in channel {channels[zero[0]]}, epoch {e}"
            )
        log_power.append(np.log(p))
    lp = np.mean(log_power, axis=0)
    values = [lp[channels.index(left)] - lp[channels.index(right)] for left, right in pairs]
    names = tuple(f"asymmetry_{left}_{right}" for left, right in pairs)
    return FeatureVector(names, np.array(values), "frequency", "asymmetry")
