"""Quantitative EEG features: spectral, amplitude, connectivity and range-EEG.

All per-band quantities use the four analysis bands clipped to the 4-45 Hz
pass band, so relative band powers partition the total.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import signal, stats

from anxeeg.errors import DegenerateSignalError, DegenerateSignalWarning, FeatureError
from anxeeg.features.vector import FeatureVector
from anxeeg.recording import EEG_CHANNELS, HEMISPHERE_PAIRS

ANALYSIS_RANGE = (4.0, 45.0)
QEEG_BANDS: dict[str, tuple[float, float]] = {
    "theta": (4.0, 8.0),
    "alpha": (8.0, 13.0),
    "beta": (13.0, 32.0),
    "gamma": (32.0, 64.0),
}


def clipped_bands(bands=QEEG_BANDS, limits=ANALYSIS_RANGE) -> dict[str, tuple[float, float]]:
    lo_lim, hi_lim = limits
    return {b: (max(lo, lo_lim), min(hi, hi_lim)) for b, (lo, hi) in bands.items()}


def band_mask(freqs: np.ndarray, lo: float, hi: float, closed: bool = False) -> np.ndarray:
    return (freqs >= lo) & ((freqs <= hi) if closed else (freqs < hi))


def _band_masks(freqs: np.ndarray, bands: dict[str, tuple[float, float]]) -> dict[str, np.ndarray]:
    # The top band is closed so the bands tile [first_lo, last_hi].
    last = list(bands)[-1]
    return {b: band_mask(freqs, lo, hi, closed=(b == last)) for b, (lo, hi) in bands.items()}


@dataclass(frozen=True)
class SpectralEstimate:
    """Welch PSD (``power``: channels x freqs) and its per-segment periodograms."""

    freqs: np.ndarray
    power: np.ndarray
    segments: np.ndarray
    method: str = "welch-hamming"

    @property
    def resolution(self) -> float:
        return float(self.freqs[1] - self.freqs[0])


def default_segment(n: int, sample_rate: float) -> int:
    return int(min(2 * sample_rate, max(n // 2, 8)))


def welch_psd(data, sample_rate: float = 128.0, segment_len: int | None = None,
              overlap: float = 0.5) -> SpectralEstimate:
    """Averaged Hamming-windowed periodograms, one-sided density.

    Density is scaled so that its integral over 0..Nyquist is the mean
    signal power.
    """
    data = np.atleast_2d(np.asarray(data, dtype=np.float64))
    n = data.shape[-1]
    seg = segment_len or default_segment(n, sample_rate)
    if seg > n:
        raise FeatureError(f"segment of {seg} samples longer than the {n}-sample trial")
    noverlap = int(seg * overlap)
    freqs, _, sxx = signal.spectrogram(data, fs=sample_rate, window="hamming", nperseg=seg,
                                       noverlap=noverlap, detrend=False,
                                       scaling="density", mode="psd")
    # spectrogram: channels x freqs x segments
    segments = np.moveaxis(sxx, -1, 1)
    return SpectralEstimate(freqs, segments.mean(axis=1), segments)


def band_integral(psd: SpectralEstimate, lo: float, hi: float, closed: bool = False) -> np.ndarray:
    mask = band_mask(psd.freqs, lo, hi, closed)
    return psd.power[:, mask].sum(axis=1) * psd.resolution


def welch_power_vector(data, sample_rate: float = 128.0, channels=EEG_CHANNELS) -> FeatureVector:
    """Absolute Welch band power, 4 bands x channels."""
    psd = welch_psd(data, sample_rate)
    bands = clipped_bands()
    masks = _band_masks(psd.freqs, bands)
    names, values = [], []
    for ci, ch in enumerate(channels):
        for b, m in masks.items():
            names.append(f"welch_power_{b}_{ch}")
            values.append(psd.power[ci, m].sum() * psd.resolution)
    return FeatureVector(tuple(names), np.array(values), "frequency", "welch_power")


def wiener_entropy(p: np.ndarray) -> np.ndarray:
    """Geometric over arithmetic mean along the last axis (spectral flatness)."""
    p = np.asarray(p, dtype=np.float64)
    am = p.mean(axis=-1)
    with np.errstate(divide="ignore"):
        gm = np.exp(np.mean(np.log(np.where(p > 0, p, np.finfo(float).tiny)), axis=-1))
    return np.where(am > 0, gm / np.where(am > 0, am, 1.0), 0.0)


def spectral_features(psd: SpectralEstimate, bands=None) -> dict[str, dict[str, np.ndarray]]:
    """Per band (values per channel): absolute/relative power, Wiener entropy, spectral difference."""
    bands = bands or clipped_bands()
    masks = _band_masks(psd.freqs, bands)
    total_mask = np.logical_or.reduce(list(masks.values()))
    total = psd.power[:, total_mask].sum(axis=1) * psd.resolution
    if np.any(total <= 0):
        raise DegenerateSignalError("zero total spectral power")
    out: dict[str, dict[str, np.ndarray]] = {}
    for b, m in masks.items():
        absolute = psd.power[:, m].sum(axis=1) * psd.resolution
        seg = psd.segments[:, :, m]
        if seg.shape[1] >= 2:
            diff = np.mean(np.diff(seg, axis=1) ** 2, axis=(1, 2))
            scale = np.mean(seg, axis=(1, 2)) ** 2
            sdiff = np.where(scale > 0, diff / np.where(scale > 0, scale, 1.0), 0.0)
        else:
            sdiff = np.zeros(seg.shape[0])
        out[b] = {
            "abs_power": absolute,
            "rel_power": absolute / total,
            "wiener_entropy": wiener_entropy(psd.power[:, m]),
            "spectral_difference": sdiff,
        }
    return out


def cutoff_frequency(psd: SpectralEstimate, fraction: float = 0.95,
                     limits=ANALYSIS_RANGE) -> np.ndarray:
    """Lowest frequency below which ``fraction`` of in-range power lies."""
    m = band_mask(psd.freqs, *limits, closed=True)
    f = psd.freqs[m]
    cum = np.cumsum(psd.power[:, m], axis=1)
    if np.any(cum[:, -1] <= 0):
        raise DegenerateSignalError("zero spectral power in the cut-off search range")
    idx = np.argmax(cum >= fraction * cum[:, -1:], axis=1)
    return f[idx]


def band_limit(data, sample_rate: float, lo: float, hi: float) -> np.ndarray:
    """Zero-phase band restriction by spectral masking."""
    data = np.asarray(data, dtype=np.float64)
    n = data.shape[-1]
    spec = np.fft.rfft(data, axis=-1)
    freqs = np.fft.rfftfreq(n, 1.0 / sample_rate)
    spec[..., ~band_mask(freqs, lo, hi, closed=hi >= sample_rate / 2)] = 0.0
    return np.fft.irfft(spec, n=n, axis=-1)


def envelope(x: np.ndarray) -> np.ndarray:
    return np.abs(signal.hilbert(x, axis=-1))


def _trim(x: np.ndarray, edge_fraction: float) -> np.ndarray:
    cut = int(np.floor(edge_fraction * x.shape[-1]))
    return x[..., cut:x.shape[-1] - cut] if cut else x


def amplitude_features(x, edge_fraction: float = 0.05) -> dict[str, float]:
    """Total power, SD, skewness, kurtosis and envelope mean/SD of one series.

    SDs use the unbiased (n - 1) convention; skewness and kurtosis are the
    bias-adjusted Fisher-Pearson coefficients. Kurtosis (excess) is an
    inferred companion of skewness. Envelope statistics skip
    ``edge_fraction`` of samples at each end.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 4:
        raise FeatureError("amplitude features need a 1-D series of at least 4 samples")
    sd = float(np.std(x, ddof=1))
    if sd == 0:
        warnings.warn("constant input: skewness/kurtosis set to 0", DegenerateSignalWarning,
                      stacklevel=2)
        skew = kurt = 0.0
    else:
        skew = float(stats.skew(x, bias=False))
        kurt = float(stats.kurtosis(x, bias=False))
    env = _trim(envelope(x), edge_fraction)
    return {
        "total_power": float(np.mean(x * x)),
        "sd": sd,
        "skewness": skew,
        "kurtosis": kurt,
        "envelope_mean": float(np.mean(env)),
        "envelope_sd": float(np.std(env, ddof=1)) if env.shape[0] > 1 else 0.0,
    }


def brain_symmetry_index(p_left: np.ndarray, p_right: np.ndarray) -> float:
    s = p_left + p_right
    ratio = np.where(s > 0, np.abs(p_left - p_right) / np.where(s > 0, s, 1.0), 0.0)
    return float(np.mean(ratio))


def envelope_correlation(left: np.ndarray, right: np.ndarray, edge_fraction: float = 0.05) -> float:
    el = _trim(envelope(left), edge_fraction)
    er = _trim(envelope(right), edge_fraction)
    if np.std(el) == 0 or np.std(er) == 0:
        warnings.warn("constant envelope: correlation set to 0", DegenerateSignalWarning,
                      stacklevel=2)
        return 0.0
    return float(np.clip(np.corrcoef(el, er)[0, 1], -1.0, 1.0))


def max_correlation_lag(left: np.ndarray, right: np.ndarray, max_lag: int) -> int:
    """Lag (samples) maximising sum_t left[t] * right[t + lag]; positive if right trails."""
    n = left.shape[0]
    max_lag = min(max_lag, n - 1)
    c = np.correlate(right, left, mode="full")
    lags = np.arange(-(n - 1), n)
    keep = np.abs(lags) <= max_lag
    c, lags = c[keep], lags[keep]
    # Ties go to the smallest |lag|.
    best = np.flatnonzero(c == c.max())
    return int(lags[best[np.argmin(np.abs(lags[best]))]])


def coherence_spectrum(left: np.ndarray, right: np.ndarray, sample_rate: float,
                       segment_len: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    n = left.shape[0]
    seg = segment_len or int(min(2 * sample_rate, max(n // 4, 8)))
    kw = dict(fs=sample_rate, window="hamming", nperseg=seg, noverlap=seg // 2, detrend=False)
    f, pxy = signal.csd(left, right, **kw)
    _, pxx = signal.welch(left, **kw)
    _, pyy = signal.welch(right, **kw)
    denom = pxx * pyy
    coh = np.where(denom > 0, np.abs(pxy) ** 2 / np.where(denom > 0, denom, 1.0), 0.0)
    return f, np.clip(coh, 0.0, 1.0)


def reeg_features(x, sample_rate: float = 128.0, window_seconds: float = 2.0,
                  overlap: float = 0.5) -> dict[str, float]:
    """Statistics of the range-EEG sequence (peak-to-peak per window).

    A series shorter than one window is treated as a single window.
    """
    x = np.asarray(x, dtype=np.float64)
    width = int(round(window_seconds * sample_rate))
    if x.shape[0] <= width:
        windows = [(0, x.shape[0])]
    else:
        step = max(1, int(round(width * (1 - overlap))))
        windows = [(s, s + width) for s in range(0, x.shape[0] - width + 1, step)]
    r = np.array([np.ptp(x[a:b]) for a, b in windows])
    mean = float(np.mean(r))
    if mean == 0:
        raise DegenerateSignalError("degenerate signal: zero range-EEG, CV undefined")
    sd = float(np.std(r, ddof=1)) if r.shape[0] > 1 else 0.0
    p5, med, p95 = (float(v) for v in np.percentile(r, [5, 50, 95]))
    spread = p95 - p5
    return {
        "mean": mean,
        "median": med,
        "sd": sd,
        "cv": sd / mean,
        "skew_median": ((p95 - med) - (med - p5)) / spread if spread > 0 else 0.0,
        "p5": p5,
        "p95": p95,
        "bandwidth": spread,
    }


# -- qEEG feature-table row bookkeeping ------------------------------------------

# row id -> (description, emitted feature keys). Keys are prefixed "qeeg_"
# in the full vector and suffixed with band and channel/pair.
QEEG_ROWS: dict[int, tuple[str, tuple[str, ...]]] = {
    1: ("absolute and relative spectral power", ("abs_power", "rel_power")),
    2: ("spectral entropy (Wiener)", ("wiener_entropy",)),
    3: ("difference between consecutive short-time spectra", ("spectral_difference",)),
    4: ("cut-off frequency (95% of power)", ("cutoff_frequency",)),
    5: ("amplitude: total power and SD", ("amp_total_power", "amp_sd")),
    6: ("amplitude: skewness (kurtosis inferred)", ("amp_skewness", "amp_kurtosis")),
    7: ("amplitude: envelope mean and SD", ("env_mean", "env_sd")),
    8: ("connectivity: brain symmetry index", ("bsi",)),
    9: ("connectivity: envelope correlation", ("env_corr",)),
    10: ("connectivity: lag of maximum cross-correlation", ("xcorr_lag",)),
    11: ("connectivity: coherence mean, max, frequency of max",
         ("coherence_mean", "coherence_max", "coherence_argmax")),
    12: ("rEEG: mean, median, SD, CV", ("reeg_mean", "reeg_median", "reeg_sd", "reeg_cv")),
    13: ("rEEG: skew about median", ("reeg_skew_median",)),
    14: ("rEEG: 5th and 95th percentiles", ("reeg_p5", "reeg_p95")),
    15: ("rEEG: p95 - p5", ("reeg_bandwidth",)),
}

# Reduced vector: per-band relative power and Wiener entropy, every other key
# averaged over channels/pairs and bands.
REDUCED_PER_BAND = ("rel_power", "wiener_entropy")
REDUCED_SCALARS = (
    "amp_total_power", "spectral_difference", "cutoff_frequency", "amp_skewness",
    "env_mean", "env_sd", "bsi", "env_corr", "xcorr_lag", "coherence_mean",
    "coherence_max", "reeg_mean", "reeg_median", "reeg_cv", "reeg_skew_median",
    "reeg_p5", "reeg_p95",
)
INFERRED_KEYS = ("amp_kurtosis",)
CHANNEL_KEYS = {"abs_power", "rel_power", "wiener_entropy", "spectral_difference",
                "amp_total_power", "amp_sd", "amp_skewness", "amp_kurtosis", "env_mean",
                "env_sd", "reeg_mean", "reeg_median", "reeg_sd", "reeg_cv",
                "reeg_skew_median", "reeg_p5", "reeg_p95", "reeg_bandwidth"}
PAIR_KEYS = {"bsi", "env_corr", "xcorr_lag", "coherence_mean", "coherence_max",
             "coherence_argmax"}


def row_of(key: str) -> int:
    for row, (_, keys) in QEEG_ROWS.items():
        if key in keys:
            return row
    raise KeyError(key)


def reduced_names() -> tuple[str, ...]:
    bands = tuple(QEEG_BANDS)
    per_band = tuple(f"qeeg_{k}_{b}" for k in REDUCED_PER_BAND for b in bands)
    return per_band + tuple(f"qeeg_{k}" for k in REDUCED_SCALARS)


def qeeg_table(data, sample_rate: float = 128.0, channels=EEG_CHANNELS,
               pairs=HEMISPHERE_PAIRS) -> dict[str, np.ndarray]:
    """Every feature key mapped to an array: (bands, channels), (bands, pairs) or scalar-per-channel."""
    data = np.asarray(data, dtype=np.float64)
    channels = tuple(channels)
    if data.ndim != 2 or data.shape[0] != len(channels):
        raise FeatureError(f"expected {len(channels)} channels")
    for left, right in pairs:
        if left not in channels or right not in channels:
            raise FeatureError(f"missing pair channel for ({left}, {right})")
    bands = clipped_bands()
    nb, nc, npair = len(bands), len(channels), len(pairs)
    out = {k: np.zeros((nb, nc)) for k in CHANNEL_KEYS}
    out.update({k: np.zeros((nb, npair)) for k in PAIR_KEYS})

    psd = welch_psd(data, sample_rate)
    spec = spectral_features(psd, bands)
    out["cutoff_frequency"] = cutoff_frequency(psd)
    masks = _band_masks(psd.freqs, bands)
    pair_idx = [(channels.index(a), channels.index(b)) for a, b in pairs]
    max_lag = int(sample_rate // 2)

    for bi, (b, (lo, hi)) in enumerate(bands.items()):
        for k in ("abs_power", "rel_power", "wiener_entropy", "spectral_difference"):
            out[k][bi] = spec[b][k]
        limited = band_limit(data, sample_rate, lo, hi)
        for ci in range(nc):
            amp = amplitude_features(limited[ci])
            out["amp_total_power"][bi, ci] = amp["total_power"]
            out["amp_sd"][bi, ci] = amp["sd"]
            out["amp_skewness"][bi, ci] = amp["skewness"]
            out["amp_kurtosis"][bi, ci] = amp["kurtosis"]
            out["env_mean"][bi, ci] = amp["envelope_mean"]
            out["env_sd"][bi, ci] = amp["envelope_sd"]
            r = reeg_features(limited[ci], sample_rate)
            for k in ("mean", "median", "sd", "cv", "skew_median", "p5", "p95", "bandwidth"):
                out[f"reeg_{k}"][bi, ci] = r[k]
        for pi, (li, ri) in enumerate(pair_idx):
            out["bsi"][bi, pi] = brain_symmetry_index(psd.power[li, masks[b]],
                                                      psd.power[ri, masks[b]])
            out["env_corr"][bi, pi] = envelope_correlation(limited[li], limited[ri])
            out["xcorr_lag"][bi, pi] = max_correlation_lag(limited[li], limited[ri], max_lag)
            f, coh = coherence_spectrum(limited[li], limited[ri], sample_rate)
            m = band_mask(f, lo, hi, closed=True)
            if not m.any():
                m = np.array([np.argmin(np.abs(f - 0.5 * (lo + hi)))])
            cb, fb = coh[m], f[m]
            out["coherence_mean"][bi, pi] = cb.mean()
            out["coherence_max"][bi, pi] = cb.max()
            out["coherence_argmax"][bi, pi] = fb[np.argmax(cb)]
    return out


def qeeg_full_vector(data, sample_rate: float = 128.0, channels=EEG_CHANNELS,
                     pairs=HEMISPHERE_PAIRS) -> FeatureVector:
    table = qeeg_table(data, sample_rate, channels, pairs)
    names, values = [], []
    pair_names = [f"{a}_{b}" for a, b in pairs]
    for row, (_, keys) in QEEG_ROWS.items():
        for k in keys:
            v = table[k]
            if k == "cutoff_frequency":
                names += [f"qeeg_{k}_{c}" for c in channels]
                values += list(v)
                continue
            where = pair_names if k in PAIR_KEYS else list(channels)
            for bi, b in enumerate(QEEG_BANDS):
                names += [f"qeeg_{k}_{b}_{w}" for w in where]
                values += list(v[bi])
    return FeatureVector(tuple(names), np.array(values), "frequency", "qeeg_full")


def qeeg_vector(data, sample_rate: float = 128.0, channels=EEG_CHANNELS,
                pairs=HEMISPHERE_PAIRS) -> FeatureVector:
    """The 25-value channel-averaged qEEG summary."""
    table = qeeg_table(data, sample_rate, channels, pairs)
    values = []
    for k in REDUCED_PER_BAND:
        values += list(table[k].mean(axis=1))
    for k in REDUCED_SCALARS:
        values.append(float(np.mean(table[k])))
    return FeatureVector(reduced_names(), np.array(values), "frequency", "qeeg")


def feature_manifest_rows() -> list[tuple[str, str, str, str]]:
    """(name, group, band, channel policy) rows for the reduced qEEG vector."""
    rows = []
    for k in REDUCED_PER_BAND:
        for b in QEEG_BANDS:
            rows.append((f"qeeg_{k}_{b}", "frequency", b, "channel-mean"))
    for k in REDUCED_SCALARS:
        policy = "pair-mean" if k in PAIR_KEYS else "channel-mean"
        band = "none" if k == "cutoff_frequency" else "band-mean"
        rows.append((f"qeeg_{k}", "frequency", band, policy))
    return rows


__all__: Sequence[str] = (
    "SpectralEstimate", "welch_psd", "spectral_features", "cutoff_frequency",
    "amplitude_features", "reeg_features", "qeeg_vector", "qeeg_full_vector",
    "welch_power_vector", "QEEG_ROWS",
)
