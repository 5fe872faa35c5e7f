"""Empirical mode decomposition and Hilbert instantaneous energy density."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.signal import hilbert

from anxeeg.errors import DegenerateSignalError, FeatureError
from anxeeg.features.vector import FeatureVector
from anxeeg.recording import EEG_CHANNELS

# Retained IMF count per trial duration (seconds).
HHT_DIMENSIONS = {30: 10, 15: 10, 5: 9, 1: 7}


@dataclass(frozen=True)
class EmdConfig:
    sd_threshold: float = 0.2
    max_sifts: int = 10
    max_imfs: int = 12
    mirror_points: int = 2
    # Stop once the residual holds less than this fraction of input energy.
    energy_floor: float = 1e-6


@dataclass(frozen=True)
class ImfDecomposition:
    imfs: tuple[np.ndarray, ...]
    residual: np.ndarray

    @property
    def count(self) -> int:
        return len(self.imfs)

    def reconstruct(self) -> np.ndarray:
        return np.sum(self.imfs, axis=0) + self.residual if self.imfs else self.residual.copy()


def find_extrema(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Indices of strict local maxima and minima (plateaus take their left edge)."""
    d = np.diff(x)
    # Carry the last non-zero slope across flat runs.
    s = np.sign(d)
    nz = np.flatnonzero(s)
    if nz.size == 0:
        return np.empty(0, dtype=int), np.empty(0, dtype=int)
    pos = np.where(s != 0, np.arange(s.shape[0]), nz[0])
    filled = s[np.maximum.accumulate(pos)]
    change = np.diff(filled)
    maxima = np.flatnonzero(change < 0) + 1
    minima = np.flatnonzero(change > 0) + 1
    return maxima, minima


def zero_crossings(x: np.ndarray) -> int:
    s = np.sign(x)
    s = s[s != 0]
    return int(np.count_nonzero(np.diff(s)))


def _envelope(t_ext: np.ndarray, v_ext: np.ndarray, n: int) -> np.ndarray:
    order = np.argsort(t_ext, kind="stable")
    t_ext, v_ext = t_ext[order], v_ext[order]
    keep = np.concatenate([[True], np.diff(t_ext) > 0])
    return CubicSpline(t_ext[keep], v_ext[keep])(np.arange(n))


def _mirrored(idx: np.ndarray, x: np.ndarray, nb: int) -> tuple[np.ndarray, np.ndarray]:
    n = x.shape[0]
    left = idx[:nb]
    right = idx[-nb:]
    t = np.concatenate([-left[::-1], idx, 2 * (n - 1) - right[::-1]]).astype(np.float64)
    v = np.concatenate([x[left[::-1]], x[idx], x[right[::-1]]])
    return t, v


def _mean_envelope(h: np.ndarray, nb: int) -> np.ndarray | None:
    maxima, minima = find_extrema(h)
    if maxima.size < 1 or minima.size < 1 or maxima.size + minima.size < 3:
        return None
    n = h.shape[0]
    upper = _envelope(*_mirrored(maxima, h, nb), n)
    lower = _envelope(*_mirrored(minima, h, nb), n)
    return 0.5 * (upper + lower)


def is_imf(h: np.ndarray) -> bool:
    maxima, minima = find_extrema(h)
    return abs(maxima.size + minima.size - zero_crossings(h)) <= 1


def _is_monotone(r: np.ndarray) -> bool:
    maxima, minima = find_extrema(r)
    return maxima.size + minima.size < 2


def emd(x, cfg: EmdConfig = EmdConfig()) -> ImfDecomposition:
    """Sift ``x`` into intrinsic mode functions plus a residual.

    Each IMF is sifted until the normalised squared change between
    successive sifts drops below ``sd_threshold`` and the extrema and
    zero-crossing counts agree within one, or ``max_sifts`` is reached.
    Extraction stops at a monotone or negligible residual, or after
    ``max_imfs`` components.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 16:
        raise FeatureError("emd needs a 1-D series of at least 16 samples")
    if np.ptp(x) == 0:
        raise DegenerateSignalError("degenerate signal (constant input)")
    maxima, minima = find_extrema(x)
    if maxima.size + minima.size < 2:
        raise DegenerateSignalError("fewer than 2 extrema: nothing to sift")

    imfs: list[np.ndarray] = []
    residual = x.copy()
    floor = cfg.energy_floor * np.sum(x * x)
    while (len(imfs) < cfg.max_imfs and not _is_monotone(residual)
           and np.sum(residual * residual) > floor):
        h = residual.copy()
        extracted = False
        for _ in range(cfg.max_sifts):
            mean = _mean_envelope(h, cfg.mirror_points)
            if mean is None:
                break
            h_new = h - mean
            denom = np.sum(h * h)
            sd = np.sum((h - h_new) ** 2) / denom if denom > 0 else 0.0
            h = h_new
            extracted = True
            if sd < cfg.sd_threshold and is_imf(h):
                break
        if not extracted:
            break
        imfs.append(h)
        residual = residual - h
    residual = x - np.sum(imfs, axis=0) if imfs else x.copy()
    return ImfDecomposition(tuple(imfs), residual)


def instantaneous_energy_density(imf: np.ndarray, edge_fraction: float = 0.05) -> float:
    """Mean squared analytic-signal amplitude, ignoring the edges."""
    imf = np.asarray(imf, dtype=np.float64)
    if imf.shape[0] < 8:
        raise FeatureError("IMF must have at least 8 samples")
    amp2 = np.abs(hilbert(imf)) ** 2
    cut = int(np.floor(edge_fraction * imf.shape[0]))
    core = amp2[cut:imf.shape[0] - cut] if cut else amp2
    return float(np.mean(core))


def hilbert_ied(dec: ImfDecomposition, edge_fraction: float = 0.05) -> np.ndarray:
    """Instantaneous energy density of each IMF in order."""
    if dec.count == 0:
        raise FeatureError("empty decomposition")
    return np.array([instantaneous_energy_density(c, edge_fraction) for c in dec.imfs])


def hht_vector(data: np.ndarray, dimension: int, channels=EEG_CHANNELS,
               cfg: EmdConfig = EmdConfig()) -> FeatureVector:
    """Channel-averaged IED per IMF index, truncated or zero-padded to ``dimension``.

    Channels that yield fewer IMFs contribute zero for the missing indices.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] != len(channels):
        raise FeatureError(f"expected {len(channels)} channels")
    table = np.zeros((data.shape[0], max(dimension, cfg.max_imfs)))
    for ci, x in enumerate(data):
        try:
            ied = hilbert_ied(emd(x, cfg))
        except (DegenerateSignalError, FeatureError) as exc:
            raise type(exc)(f"channel {channels[ci]}: {exc}") from exc
        table[ci, :ied.shape[0]] = ied
    values = table.mean(axis=0)[:dimension]
    names = tuple(f"hht_ied_imf{i + 1}" for i in range(dimension))
    return FeatureVector(names, values, "time_frequency", "hht")
