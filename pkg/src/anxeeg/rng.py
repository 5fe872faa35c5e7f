"""Seed splitting: one user seed, independent counter-based streams per stage."""

from __future__ import annotations

import numpy as np

# Fixed stage numbers so adding a stage never shifts another stage's stream.
STAGES = {"preprocess": 1, "extract": 2, "label": 3, "train": 4, "evaluate": 5, "fixture": 6}


def seed_sequence(seed: int, stage: str, *path: int) -> np.random.SeedSequence:
    if not 0 <= int(seed) < 2 ** 64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.SeedSequence([int(seed), STAGES[stage], *map(int, path)])


def stage_rng(seed: int, stage: str, *path: int) -> np.random.Generator:
    """Philox-backed generator for ``(seed, stage, *path)``."""
    return np.random.Generator(np.random.Philox(seed_sequence(seed, stage, *path)))
