"""Band-pass filtering and trial segmentation."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Mapping, Sequence

import numpy as np
from scipy import signal

from anxeeg.errors import FilterError, SegmentationError
from anxeeg.recording import Recording

if TYPE_CHECKING:
    from anxeeg.labeling import AnxietyLabel

TRIAL_SECONDS = 30
BLOCK_SECONDS = 60
N_SITUATIONS = 6
SUB_TRIAL_SECONDS = (30, 15, 5, 1)


@dataclass(frozen=True)
class FilterSpec:
    low_cut: float = 4.0
    high_cut: float = 45.0
    num_taps: int = 129
    window: str = "hamming"

    def validate(self, sample_rate: float) -> None:
        nyq = sample_rate / 2.0
        if not 0 < self.low_cut < self.high_cut:
            raise FilterError(f"need 0 < low_cut < high_cut, got {self.low_cut}, {self.high_cut}")
        if self.high_cut >= nyq:
            raise FilterError(f"high_cut {self.high_cut} Hz is at or above Nyquist ({nyq} Hz)")
        if self.num_taps < 3 or self.num_taps % 2 == 0:
            raise FilterError("num_taps must be an odd integer >= 3")

    def taps(self, sample_rate: float) -> np.ndarray:
        self.validate(sample_rate)
        h = signal.firwin(self.num_taps, [self.low_cut, self.high_cut], pass_zero=False,
                          window=self.window, fs=sample_rate)
        # firwin leaves a small residual DC gain; remove it along the window
        # shape so the taps stay symmetric.
        w = signal.get_window(self.window, self.num_taps, fftbins=False)
        return h - h.sum() * w / w.sum()


def fir_bandpass(rec: Recording, spec: FilterSpec = FilterSpec()) -> Recording:
    """Zero-phase FIR band-pass.

    The linear-phase filter is run forward and the output advanced by its
    integral group delay of ``(num_taps - 1) / 2`` samples, keeping the
    input length. That many samples at each edge are marked as transient.
    """
    h = spec.taps(rec.sample_rate)
    if rec.n_samples < spec.num_taps:
        raise FilterError(
            f"recording of {rec.n_samples} samples is shorter than the filter ({spec.num_taps} taps)"
        )
    delay = (spec.num_taps - 1) // 2
    full = signal.convolve(rec.data, h[np.newaxis, :], mode="full", method="direct")
    out = full[:, delay:delay + rec.n_samples]
    return rec.replace_data(out, transient=max(rec.transient, delay))


@dataclass(frozen=True)
class Trial:
    subject_id: str
    situation: int
    channels: tuple[str, ...]
    sample_rate: float
    data: np.ndarray
    duration: float
    valence: int | None = None
    arousal: int | None = None
    label: "AnxietyLabel | None" = None
    index: int = 0
    transient_head: int = 0
    transient_tail: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] != len(self.channels):
            raise SegmentationError("trial data must be channels x samples")
        expected = self.duration * self.sample_rate
        if not float(expected).is_integer() or data.shape[1] != int(expected):
            raise SegmentationError(
                f"trial has {data.shape[1]} samples, expected duration x rate = {expected}"
            )
        if not 1 <= self.situation <= N_SITUATIONS:
            raise SegmentationError(f"situation index {self.situation} outside 1..{N_SITUATIONS}")

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    def usable_data(self) -> np.ndarray:
        """Samples outside any filter transient the trial touches."""
        return self.data[:, self.transient_head:self.n_samples - self.transient_tail]

    def with_label(self, label: "AnxietyLabel") -> "Trial":
        return replace(self, label=label)

    def key(self) -> tuple[str, int, int]:
        return (self.subject_id, self.situation, self.index)


def segment_trials(
    rec: Recording,
    ratings: Mapping[int, tuple[int, int]] | None = None,
    trial_len: float = TRIAL_SECONDS,
    block_len: float = BLOCK_SECONDS,
    n_trials: int = N_SITUATIONS,
) -> list[Trial]:
    """Cut the stimulation window out of each one-minute situation block.

    ``ratings`` maps situation number to ``(valence, arousal)``.
    """
    fs = rec.sample_rate
    block = int(round(block_len * fs))
    length = int(round(trial_len * fs))
    if rec.n_samples < n_trials * block:
        raise SegmentationError(
            f"recording too short: {rec.duration:.1f} s, need {n_trials * block_len:.0f} s"
        )
    ratings = ratings or {}
    usable_end = rec.n_samples - rec.transient
    trials = []
    for i in range(n_trials):
        start = i * block
        stop = start + length
        v, a = ratings.get(i + 1, (None, None))
        trials.append(Trial(
            subject_id=rec.subject_id,
            situation=i + 1,
            channels=rec.channels,
            sample_rate=fs,
            data=rec.data[:, start:stop],
            duration=trial_len,
            valence=v,
            arousal=a,
            transient_head=max(0, rec.transient - start),
            transient_tail=max(0, stop - usable_end),
        ))
    return trials


def subsegment(trial: Trial, sub_len: float) -> list[Trial]:
    """Split a trial into consecutive non-overlapping windows of ``sub_len`` s."""
    if sub_len <= 0:
        raise SegmentationError("sub-trial length must be positive")
    if sub_len == trial.duration:
        return [trial]
    count = trial.duration / sub_len
    if not float(count).is_integer():
        raise SegmentationError(
            f"sub-trial length {sub_len} s does not divide trial duration {trial.duration} s"
        )
    width = int(round(sub_len * trial.sample_rate))
    n = trial.n_samples
    out = []
    for k in range(int(count)):
        start, stop = k * width, (k + 1) * width
        out.append(replace(
            trial,
            data=trial.data[:, start:stop],
            duration=sub_len,
            index=k,
            transient_head=min(width, max(0, trial.transient_head - start)),
            transient_tail=min(width, max(0, stop - (n - trial.transient_tail))),
        ))
    return out


def subsegment_all(trials: Sequence[Trial], sub_len: float) -> list[Trial]:
    return [s for t in trials for s in subsegment(t, sub_len)]


# -- sidecar label table ----------------------------------------------------

TRIAL_TABLE_COLUMNS = ("subject", "situation", "index", "duration", "valence", "arousal", "label")


def write_trial_table(trials: Sequence[Trial]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter="\t", lineterminator="\n")
    w.writerow(TRIAL_TABLE_COLUMNS)
    for t in trials:
        label = "" if t.label is None else t.label.four_level
        w.writerow([t.subject_id, t.situation, t.index, f"{t.duration:g}",
                    "" if t.valence is None else t.valence,
                    "" if t.arousal is None else t.arousal, label])
    return buf.getvalue()


def read_trial_table(text: str) -> list[dict]:
    rows = list(csv.DictReader(io.StringIO(text), delimiter="\t"))
    if rows and set(TRIAL_TABLE_COLUMNS) - set(rows[0]):
        raise SegmentationError("trial table is missing columns")
    out = []
    for r in rows:
        out.append({
            "subject": r["subject"],
            "situation": int(r["situation"]),
            "index": int(r["index"]),
            "duration": float(r["duration"]),
            "valence": int(r["valence"]) if r["valence"] else None,
            "arousal": int(r["arousal"]) if r["arousal"] else None,
            "label": r["label"] or None,
        })
    return out
