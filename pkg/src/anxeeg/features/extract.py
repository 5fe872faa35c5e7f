"""Feature families, group manifest and per-trial extraction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from anxeeg.errors import FeatureError
from anxeeg.features import hht, qeeg, time, wavelet
from anxeeg.features.vector import GROUPS, FeatureVector
from anxeeg.preprocess import Trial
from anxeeg.recording import EEG_CHANNELS


@dataclass(frozen=True)
class Family:
    name: str
    group: str
    compute: Callable[[np.ndarray, float, float], FeatureVector]
    size: Callable[[float], int]


def _hht(data, fs, duration):
    return hht.hht_vector(data, hht_dimension(duration))


def hht_dimension(duration: float) -> int:
    d = int(round(duration))
    if d not in hht.HHT_DIMENSIONS:
        raise FeatureError(f"no HHT dimension configured for {duration} s trials")
    return hht.HHT_DIMENSIONS[d]


# Manifest order; group vectors concatenate their families in this order.
FAMILIES: dict[str, Family] = {f.name: f for f in (
    Family("hjorth", "time", lambda d, fs, T: time.hjorth_vector(d), lambda T: 42),
    Family("fd", "time", lambda d, fs, T: time.fd_vector(d, sample_rate=fs), lambda T: 14),
    Family("welch_power", "frequency", lambda d, fs, T: qeeg.welch_power_vector(d, fs),
           lambda T: 56),
    Family("asymmetry", "frequency", lambda d, fs, T: wavelet.asymmetry_index(d, fs),
           lambda T: 7),
    Family("qeeg", "frequency", lambda d, fs, T: qeeg.qeeg_vector(d, fs), lambda T: 25),
    Family("power", "time_frequency", lambda d, fs, T: wavelet.dwt_power_vector(d),
           lambda T: 56),
    Family("rms", "time_frequency", lambda d, fs, T: wavelet.dwt_rms_vector(d), lambda T: 56),
    Family("approx_power", "time_frequency",
           lambda d, fs, T: wavelet.dwt_approx_power_vector(d), lambda T: 14),
    Family("hht", "time_frequency", _hht, hht_dimension),
)}

GROUP_ALIASES = {"all": GROUPS}


def resolve_families(selection: Sequence[str]) -> tuple[str, ...]:
    """Expand group names and ``all`` into family names, in manifest order."""
    if not selection:
        raise FeatureError("empty feature selection")
    wanted: set[str] = set()
    for item in selection:
        item = item.strip()
        if item in FAMILIES:
            wanted.add(item)
        elif item in GROUPS or item in GROUP_ALIASES:
            groups = GROUP_ALIASES.get(item, (item,))
            wanted.update(n for n, f in FAMILIES.items() if f.group in groups)
        else:
            raise FeatureError(f"unknown feature family or group {item!r}")
    return tuple(n for n in FAMILIES if n in wanted)


def manifest_dimension(selection: Sequence[str], duration: float = 1.0) -> int:
    return sum(FAMILIES[n].size(duration) for n in resolve_families(selection))


def manifest_table(duration: float = 1.0) -> str:
    """Tab-separated (family, group, dimension) rows plus per-group totals."""
    lines = ["family\tgroup\tdimension"]
    for f in FAMILIES.values():
        lines.append(f"{f.name}\t{f.group}\t{f.size(duration)}")
    for g in GROUPS + ("all",):
        lines.append(f"[{g}]\t{g}\t{manifest_dimension([g], duration)}")
    return "\n".join(lines) + "\n"


def extract_families(data: np.ndarray, sample_rate: float, duration: float,
                     families: Sequence[str]) -> list[FeatureVector]:
    data = np.asarray(data, dtype=np.float64)
    out = []
    for name in families:
        fam = FAMILIES[name]
        vec = fam.compute(data, sample_rate, duration)
        if len(vec) != fam.size(duration):
            raise FeatureError(f"{name}: produced {len(vec)} features, manifest says "
                               f"{fam.size(duration)}")
        out.append(vec)
    return out


def extract_trial(trial: Trial, selection: Sequence[str]) -> list[FeatureVector]:
    """Per-family feature vectors of one trial in manifest order.

    Samples inside a filter transient (see :meth:`Trial.usable_data`) are
    dropped before extraction.
    """
    trial_data = _reorder(trial)
    families = resolve_families(selection)
    return extract_families(trial_data, trial.sample_rate, trial.duration, families)


def _reorder(trial: Trial) -> np.ndarray:
    missing = [c for c in EEG_CHANNELS if c not in trial.channels]
    if missing:
        raise FeatureError(f"trial lacks channels {missing}")
    idx = [trial.channels.index(c) for c in EEG_CHANNELS]
    return np.asarray(trial.usable_data())[idx]


def feature_names(selection: Sequence[str], duration: float, sample_rate: float = 128.0) -> tuple[str, ...]:
    """Names for a selection, computed on a reference noise trial."""
    n = int(round(duration * sample_rate))
    ref = np.random.default_rng(0).standard_normal((len(EEG_CHANNELS), n))
    vecs = extract_families(ref, sample_rate, duration, resolve_families(selection))
    return tuple(name for v in vecs for name in v.names)
