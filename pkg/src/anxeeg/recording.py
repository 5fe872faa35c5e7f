"""In-memory model of a multi-channel EEG recording."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

# Emotiv EPOC montage, in the order used for every per-channel feature block.
EEG_CHANNELS: tuple[str, ...] = (
    "AF3", "F7", "F3", "FC5", "T7", "P7", "O1",
    "O2", "P8", "T8", "FC6", "F4", "F8", "AF4",
)

# Homologous left/right electrode pairs.
HEMISPHERE_PAIRS: tuple[tuple[str, str], ...] = (
    ("AF3", "AF4"),
    ("F7", "F8"),
    ("F3", "F4"),
    ("FC5", "FC6"),
    ("T7", "T8"),
    ("P7", "P8"),
    ("O1", "O2"),
)

DEFAULT_SAMPLE_RATE = 128.0


@dataclass(frozen=True)
class Recording:
    """Channel-major matrix of physical values (microvolts).

    ``transient`` is the number of samples at each edge of the recording that
    are known to be corrupted by a filter start-up transient.
    """

    channels: tuple[str, ...]
    sample_rate: float
    data: np.ndarray
    subject_id: str = ""
    meta: dict[str, Any] = field(default_factory=dict, compare=False)
    transient: int = 0

    def __post_init__(self) -> None:
        channels = tuple(str(c) for c in self.channels)
        object.__setattr__(self, "channels", channels)
        data = np.array(self.data, dtype=np.float64, copy=True)
        if data.ndim == 1:
            data = data[np.newaxis, :]
        if data.ndim != 2:
            raise ValueError("recording data must be channels x samples")
        if len(channels) == 0:
            raise ValueError("recording needs at least one channel")
        if data.shape[0] != len(channels):
            raise ValueError(
                f"{len(channels)} channel names for {data.shape[0]} data rows"
            )
        if len(set(channels)) != len(channels):
            raise ValueError("channel names must be unique")
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")
        data.flags.writeable = False
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate

    @property
    def non_eeg(self) -> tuple[str, ...]:
        """Channels kept from the source file that are not scalp EEG sites."""
        return tuple(c for c in self.channels if c not in EEG_CHANNELS)

    def channel(self, name: str) -> np.ndarray:
        return self.data[self.channels.index(name)]

    def pick(self, names: Sequence[str]) -> "Recording":
        missing = [n for n in names if n not in self.channels]
        if missing:
            raise KeyError(f"channels not in recording: {missing}")
        idx = [self.channels.index(n) for n in names]
        return Recording(
            tuple(names), self.sample_rate, self.data[idx], self.subject_id,
            dict(self.meta), self.transient,
        )

    def pick_eeg(self) -> "Recording":
        """The 14 montage channels in canonical order."""
        return self.pick(EEG_CHANNELS)

    def replace_data(self, data: np.ndarray, transient: int | None = None) -> "Recording":
        return Recording(
            self.channels, self.sample_rate, data, self.subject_id, dict(self.meta),
            self.transient if transient is None else transient,
        )

    def equals(self, other: "Recording", atol: float = 0.0) -> bool:
        return (
            self.channels == other.channels
            and self.sample_rate == other.sample_rate
            and self.subject_id == other.subject_id
            and self.data.shape == other.data.shape
            and bool(np.allclose(self.data, other.data, rtol=0.0, atol=atol))
        )
