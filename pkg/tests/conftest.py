import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from anxeeg.recording import EEG_CHANNELS, Recording

FS = 128.0


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def trial_data(rng):
    """One second of 14-channel noise plus an alpha tone, in montage order."""
    t = np.arange(int(FS)) / FS
    return 5 * rng.standard_normal((len(EEG_CHANNELS), t.size)) + 10 * np.sin(2 * np.pi * 10 * t)


@pytest.fixture
def make_recording(rng):
    def make(seconds=360.0, fs=FS, channels=EEG_CHANNELS, subject="S01"):
        n = int(seconds * fs)
        return Recording(tuple(channels), fs, rng.standard_normal((len(channels), n)), subject)
    return make


def data_dir() -> Path | None:
    """Dataset directory from ANXEEG_DATA, or None when absent."""
    value = os.environ.get("ANXEEG_DATA")
    if not value:
        return None
    path = Path(value)
    return path if path.is_dir() else None



# Acceptance outcomes, printed as one line each at the end of the session.
ACCEPTANCE: list[tuple[str, str, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for status, name, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{status} {name}: {detail}")


settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repro"))
