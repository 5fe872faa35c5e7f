import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from anxeeg.errors import DegenerateSignalError, DegenerateSignalWarning, FeatureError
from anxeeg.features.time import (HiguchiConfig, fd_vector, higuchi_fd, hjorth,
                                  hjorth_vector)
from anxeeg.recording import EEG_CHANNELS
from oracles import higuchi_direct, hjorth_direct

finite = st.integers(-10 ** 6, 10 ** 6).map(lambda v: v / 1000.0)


def test_zero_signal_is_degenerate():
    with pytest.raises(DegenerateSignalError, match="degenerate signal \\(zero activity\\)"):
        hjorth(np.zeros(16))


def test_constant_signal_is_degenerate():
    with pytest.raises(DegenerateSignalError):
        hjorth(np.full(16, 3.0))


def test_too_short():
    with pytest.raises(FeatureError):
        hjorth([1.0, 2.0])


def test_alternating_sequence():
    p = hjorth([1, -1, 1, -1, 1, -1, 1, -1])
    assert p.activity == 1.0
    assert p.mobility == 4.0
    assert p.complexity == 0.0


def test_sine_matches_direct_summation():
    x = np.sin(2 * np.pi * 10 * np.arange(128) / 128)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateSignalWarning)
        got = hjorth(x)
    ref = hjorth_direct(x)
    assert got.activity == pytest.approx(ref[0], abs=1e-9)
    assert got.mobility == pytest.approx(ref[1], abs=1e-9)
    assert got.complexity == pytest.approx(ref[2], abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.integers(3, 300), elements=finite))
def test_matches_direct_summation(x):
    assume(np.any(np.diff(x) != 0) and np.any(x != 0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateSignalWarning)
        got = hjorth(x)
    ref = hjorth_direct(x)
    np.testing.assert_allclose([got.activity, got.mobility], ref[:2], rtol=1e-9, atol=1e-9)
    # sqrt amplifies rounding near a zero radicand, so compare the squared form there
    np.testing.assert_allclose(got.complexity ** 2, ref[2] ** 2, rtol=1e-9, atol=1e-9)
    if ref[2] > 1e-3:
        assert got.complexity == pytest.approx(ref[2], rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(-6, 6), st.sampled_from([1.0, -1.0]))
def test_power_of_two_scaling_is_exact(seed, e, sign):
    x = np.random.default_rng(seed).standard_normal(200)
    c = sign * 2.0 ** e
    a, b = hjorth(x), hjorth(c * x)
    assert b.activity == c * c * a.activity
    assert b.mobility == a.mobility
    assert b.complexity == a.complexity


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(1e-3, 1e3))
def test_scale_law(seed, c):
    x = np.random.default_rng(seed).standard_normal(200)
    a, b = hjorth(x), hjorth(c * x)
    assert b.activity == pytest.approx(c * c * a.activity, rel=1e-12)
    assert b.mobility == pytest.approx(a.mobility, rel=1e-12)
    assert b.complexity == pytest.approx(a.complexity, rel=1e-12)


def test_negative_radicand_clamped_with_warning():
    x = np.sin(2 * np.pi * 40 * np.arange(128) / 128)
    with pytest.warns(DegenerateSignalWarning, match="clamped"):
        assert hjorth(x).complexity == 0.0


def test_classical_switch(rng):
    x = rng.standard_normal(500)
    p = hjorth(x, classical=True)
    dx, ddx = np.diff(x), np.diff(x, 2)
    mob = np.sqrt(dx.var() / x.var())
    assert p.activity == pytest.approx(x.var())
    assert p.mobility == pytest.approx(mob)
    assert p.complexity == pytest.approx(np.sqrt(ddx.var() / dx.var()) / mob)


def test_hjorth_vector_length(trial_data):
    v = hjorth_vector(trial_data)
    assert len(v) == 42 and v.group == "time"
    assert v.names[:3] == ("hjorth_activity_AF3", "hjorth_mobility_AF3", "hjorth_complexity_AF3")


def test_hjorth_vector_permutes_blocks(trial_data, rng):
    perm = rng.permutation(14)
    a = hjorth_vector(trial_data).values.reshape(14, 3)
    b = hjorth_vector(trial_data[perm]).values.reshape(14, 3)
    np.testing.assert_array_equal(b, a[perm])


def test_hjorth_vector_needs_montage():
    with pytest.raises(FeatureError, match="expected 14 channels"):
        hjorth_vector(np.ones((1, 128)))


def test_channel_named_in_errors(trial_data):
    data = trial_data.copy()
    data[4] = 0.0
    with pytest.raises(DegenerateSignalError, match=EEG_CHANNELS[4]):
        hjorth_vector(data)


def test_higuchi_line():
    d = higuchi_fd(np.arange(1000.0), HiguchiConfig(8))
    assert 0.95 <= d <= 1.05
    assert d == pytest.approx(higuchi_direct(np.arange(1000.0), 8), abs=1e-9)


def test_higuchi_white_noise_over_seeds():
    ds = [higuchi_fd(np.random.default_rng(s).standard_normal(1000), HiguchiConfig(8))
          for s in range(20)]
    assert 1.9 <= np.mean(ds) <= 2.05


@pytest.mark.parametrize("seed", range(5))
def test_higuchi_matches_direct_oracle(seed):
    x = np.random.default_rng(seed).standard_normal(300)
    assert higuchi_fd(x, HiguchiConfig(8)) == pytest.approx(higuchi_direct(x, 8), abs=1e-9)


def test_higuchi_stable_across_seeds():
    n = 4096
    cfg = HiguchiConfig.for_length(n)
    ds = [higuchi_fd(np.random.default_rng(100 + s).standard_normal(n), cfg) for s in range(20)]
    assert np.std(ds) < 0.05


def test_higuchi_constant_rejected():
    with pytest.raises(DegenerateSignalError):
        higuchi_fd(np.ones(100))


def test_higuchi_too_short():
    with pytest.raises(FeatureError, match="too short"):
        higuchi_fd(np.arange(10.0), HiguchiConfig(8))


@pytest.mark.parametrize("n, k", [(128, 8), (640, 16), (3840, 16)])
def test_k_max_by_length(n, k):
    assert HiguchiConfig.for_length(n).k_max == k


def test_fd_vector(trial_data):
    v = fd_vector(trial_data)
    assert len(v) == 14 and np.all(np.isfinite(v.values))
