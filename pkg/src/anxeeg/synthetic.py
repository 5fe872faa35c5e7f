"""Seeded synthetic recordings shaped like the 14-channel, 6-situation protocol.

Used by the test suite and the end-to-end fixture. Situations rated as
anxious carry stronger beta and weaker alpha activity, so labels are
learnable from band-power style features.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from anxeeg.edf import write_edf
from anxeeg.labeling import SamRating, write_ratings
from anxeeg.preprocess import BLOCK_SECONDS, N_SITUATIONS
from anxeeg.recording import DEFAULT_SAMPLE_RATE, EEG_CHANNELS, Recording
from anxeeg.rng import stage_rng

# (valence, arousal) per situation; both subjects mix calm and anxious blocks.
FIXTURE_RATINGS = {
    "S01": [(1, 9), (7, 2), (2, 7), (8, 3), (4, 5), (6, 4)],
    "S02": [(7, 3), (1, 8), (6, 2), (3, 6), (8, 1), (2, 9)],
}


def pink_noise(rng: np.random.Generator, shape: tuple[int, int]) -> np.ndarray:
    """1/f-shaped noise by spectral weighting of white noise."""
    n = shape[-1]
    spec = np.fft.rfft(rng.standard_normal(shape), axis=-1)
    f = np.fft.rfftfreq(n)
    f[0] = f[1]
    x = np.fft.irfft(spec / np.sqrt(f), n=n, axis=-1)
    return x / x.std(axis=-1, keepdims=True)


def synthetic_recording(subject: str, anxious: list[float], seed: int = 0,
                        sample_rate: float = DEFAULT_SAMPLE_RATE,
                        extra_channels: tuple[str, ...] = ()) -> Recording:
    """Six one-minute blocks; ``anxious[k]`` in [0, 1] shifts block k from alpha to beta."""
    rng = stage_rng(seed, "fixture", int.from_bytes(subject.encode()[:7].ljust(7, b"\0"), "big"))
    block = int(BLOCK_SECONDS * sample_rate)
    n = N_SITUATIONS * block
    t = np.arange(n) / sample_rate
    nch = len(EEG_CHANNELS)
    data = 5.0 * pink_noise(rng, (nch, n))
    level = np.repeat(np.asarray(anxious, dtype=float), block)
    phase = rng.uniform(0, 2 * np.pi, (nch, 2))
    alpha = (1.0 - level) * 12.0 * np.sin(2 * np.pi * 10.0 * t + phase[:, :1])
    beta = level * 12.0 * np.sin(2 * np.pi * 21.0 * t + phase[:, 1:])
    data = data + alpha + beta
    if extra_channels:
        data = np.vstack([data, 2.0 * rng.standard_normal((len(extra_channels), n))])
    return Recording(EEG_CHANNELS + tuple(extra_channels), sample_rate, data, subject)


def _severity(v: int, a: int) -> float:
    return float(np.clip((a - v + 8) / 16.0, 0.0, 1.0))


def write_fixture(directory: str | Path, seed: int = 0) -> dict[str, Path]:
    """Write ``<subject>.edf`` files, ``ratings.csv`` and ``pipeline.ini``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    ratings = {}
    for subject, rows in FIXTURE_RATINGS.items():
        rec = synthetic_recording(subject, [_severity(v, a) for v, a in rows], seed)
        (directory / f"{subject}.edf").write_bytes(write_edf(rec))
        for k, (v, a) in enumerate(rows, 1):
            ratings[(subject, k)] = SamRating(v, a)
    (directory / "ratings.csv").write_text(write_ratings(ratings))
    ini = directory / "pipeline.ini"
    ini.write_text(FIXTURE_CONFIG)
    return {"config": ini, "ratings": directory / "ratings.csv"}


FIXTURE_CONFIG = """\
[input]
recordings = S01.edf, S02.edf
ratings = ratings.csv

[filter]
low_cut = 4
high_cut = 45
num_taps = 129

[trials]
duration = 1

[features]
groups = hjorth, power, rms

[labels]
levels = 2

[classifier]
kind = knn
k = 5

[cv]
folds = 5

[run]
seed = 7
"""
