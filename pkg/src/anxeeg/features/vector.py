from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

GROUPS = ("time", "frequency", "time_frequency")


@dataclass(frozen=True)
class FeatureVector:
    """Named, ordered features with a domain group tag."""

    names: tuple[str, ...]
    values: np.ndarray
    group: str
    family: str = ""

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if values.shape[0] != len(self.names):
            raise ValueError(f"{len(self.names)} names for {values.shape[0]} values")
        if self.group not in GROUPS:
            raise ValueError(f"unknown feature group {self.group!r}")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.names)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values.tolist()))


def concat(vectors: Sequence[FeatureVector], group: str, family: str = "") -> FeatureVector:
    return FeatureVector(
        tuple(n for v in vectors for n in v.names),
        np.concatenate([v.values for v in vectors]) if vectors else np.empty(0),
        group,
        family,
    )
