import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anxeeg.errors import DegenerateSignalError, FeatureError
from anxeeg.features.wavelet import (BANDS, BandMap, WaveletDecomposition, asymmetry_index,
                                     band_power, dwt, dwt_approx_power_vector,
                                     dwt_power_vector, dwt_rms_vector, idwt, rms_per_band)
from anxeeg.recording import EEG_CHANNELS, HEMISPHERE_PAIRS

pywt = pytest.importorskip("pywt")


def _energy_share(x, levels=5, mode="symmetric"):
    e = dwt(x, levels, mode=mode).coefficient_energies()
    return e / e.sum()


def _tone(freq, fs, n):
    return np.sin(2 * np.pi * freq * np.arange(n) / fs)


@pytest.mark.parametrize("mode", ["symmetric", "periodization"])
def test_reconstruction_hundred_random_signals(mode):
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(128, 3841))
        x = rng.standard_normal(n)
        err = np.linalg.norm(idwt(dwt(x, mode=mode)) - x) / np.linalg.norm(x)
        worst = max(worst, err)
    assert worst < 1e-6


def test_impulse_reconstruction():
    x = np.zeros(256)
    x[97] = 1.0
    np.testing.assert_allclose(idwt(dwt(x)), x, atol=1e-9)


@pytest.mark.filterwarnings("ignore:Level value")
@pytest.mark.parametrize("mode", ["symmetric", "periodization"])
@pytest.mark.parametrize("n", [128, 129, 640, 1920, 3840])
def test_matches_reference_toolbox(mode, n):
    x = np.random.default_rng(n).standard_normal(n)
    ours = dwt(x, mode=mode)
    ref = pywt.wavedec(x, "db5", mode=mode, level=5)
    np.testing.assert_allclose(ours.approx, ref[0], atol=1e-10)
    for level in range(1, 6):
        np.testing.assert_allclose(ours.detail(level), ref[-level], atol=1e-10)


def test_coefficient_counts_halve():
    dec = dwt(np.ones(3840))
    counts = [d.shape[-1] for d in dec.details]
    n = 3840
    for c in counts:
        n = (n + 10 - 1) // 2
        assert c == n


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([128, 256, 640, 1920, 3840]))
def test_periodized_energy_bookkeeping(seed, n):
    x = np.random.default_rng(seed).standard_normal(n)
    e = dwt(x, mode="periodization").coefficient_energies().sum()
    assert e == pytest.approx(np.sum(x * x), rel=0.01)


def test_multichannel_matches_per_channel(trial_data):
    dec = dwt(trial_data)
    for c in (0, 7, 13):
        one = dwt(trial_data[c])
        np.testing.assert_allclose(dec.detail(3)[c], one.detail(3), atol=1e-12)


def test_too_short_at_deepest_level():
    with pytest.raises(FeatureError, match="shorter than 2\\^5"):
        dwt(np.ones(20))


def test_band_map_table_pairs():
    m = BandMap.table()
    assert [m.level(b) for b in BANDS] == [5, 4, 3, 2]


@pytest.mark.parametrize("freq, level", [(10.0, 4), (20.0, 3), (6.0, 5)])
def test_table_mapping_holds_at_256_hz(freq, level):
    share = _energy_share(_tone(freq, 256.0, 2560))
    assert np.argmax(share[:5]) + 1 == level
    if freq == 10.0:
        assert share[level - 1] >= 0.70


@pytest.mark.parametrize("freq, band", [(10.0, "alpha"), (22.0, "beta"), (6.0, "theta"),
                                        (48.0, "gamma")])
def test_rate_derived_mapping_at_128_hz(freq, band):
    level = BandMap.for_rate(128.0).level(band)
    share = _energy_share(_tone(freq, 128.0, 3840))
    assert np.argmax(share[:5]) + 1 == level


def test_rate_derived_mapping_reduces_to_table_at_256_hz():
    m = BandMap.for_rate(256.0)
    assert {b: m.level(b) for b in BANDS} == {b: BandMap.table().level(b) for b in BANDS}


def test_zero_signal_zero_power():
    dec = dwt(np.zeros((14, 128)))
    for b in BANDS:
        np.testing.assert_array_equal(band_power(dec, b), 0.0)


def test_power_homogeneity(trial_data):
    a = dwt_power_vector(trial_data).values
    b = dwt_power_vector(2 * trial_data).values
    np.testing.assert_allclose(b, 4 * a, rtol=1e-12)


def test_unmapped_band():
    with pytest.raises(FeatureError, match="unmapped band"):
        band_power(dwt(np.ones(128)), "mu")


@pytest.mark.parametrize("vector", [dwt_power_vector, dwt_rms_vector])
def test_56_dimensions(trial_data, vector):
    v = vector(trial_data)
    assert len(v) == 56 and v.group == "time_frequency"


def test_approx_power_flag(trial_data):
    assert len(dwt_approx_power_vector(trial_data)) == 14


def _hand_decomposition(d1, d2):
    d1, d2 = np.asarray(d1, float), np.asarray(d2, float)
    return WaveletDecomposition((d1, d2), np.zeros(1), (4, 2))


def test_rms_hand_example():
    dec = _hand_decomposition([1, 1], [2])
    rms = rms_per_band(dec, "gamma", BandMap({"gamma": 2}))
    assert rms == pytest.approx(np.sqrt(6 / 3))
    assert rms == pytest.approx(1.414, abs=1e-3)


@pytest.mark.parametrize("c", [0.5, -3.0, 7.25])
def test_rms_of_constant_details(c):
    dec = _hand_decomposition([c, c, c], [c, c])
    m = BandMap({"beta": 2})
    assert rms_per_band(dec, "beta", m) == pytest.approx(abs(c))
    assert rms_per_band(dec, "beta", m, cumulative=False) == pytest.approx(abs(c))


def test_rms_per_level_variant():
    dec = _hand_decomposition([1, 1], [2])
    assert rms_per_band(dec, "gamma", BandMap({"gamma": 2}), cumulative=False) == 2.0


def test_deterministic_repeat(trial_data):
    a = dwt_rms_vector(trial_data).values
    b = dwt_rms_vector(trial_data.copy()).values
    np.testing.assert_array_equal(a, b)


def _paired(left_scale=1.0, seconds=4, seed=0):
    rng = np.random.default_rng(seed)
    n = int(seconds * 128)
    base = rng.standard_normal((7, n)) + np.sin(2 * np.pi * 10 * np.arange(n) / 128)
    data = np.zeros((14, n))
    for p, (left, right) in enumerate(HEMISPHERE_PAIRS):
        data[EEG_CHANNELS.index(left)] = left_scale * base[p]
        data[EEG_CHANNELS.index(right)] = base[p]
    return data


def test_asymmetry_identical_sides():
    np.testing.assert_allclose(asymmetry_index(_paired()).values, 0.0, atol=1e-12)


def test_asymmetry_known_ratio():
    v = asymmetry_index(_paired(left_scale=np.sqrt(np.e))).values
    np.testing.assert_allclose(v, 1.0, atol=1e-6)


def test_asymmetry_antisymmetric(trial_data):
    swap = list(range(14))
    for left, right in HEMISPHERE_PAIRS:
        i, j = EEG_CHANNELS.index(left), EEG_CHANNELS.index(right)
        swap[i], swap[j] = j, i
    a = asymmetry_index(trial_data).values
    b = asymmetry_index(trial_data[swap]).values
    np.testing.assert_allclose(b, -a, atol=1e-12)


def test_asymmetry_pairs_cover_montage():
    flat = [c for pair in HEMISPHERE_PAIRS for c in pair]
    assert sorted(flat) == sorted(EEG_CHANNELS)


def test_asymmetry_zero_alpha_names_channel():
    data = _paired()
    data[EEG_CHANNELS.index("F3")] = 0.0
    with pytest.raises(DegenerateSignalError, match="F3.*epoch 0"):
        asymmetry_index(data)


def test_asymmetry_epoch_range():
    with pytest.raises(FeatureError, match="1-2 s"):
        asymmetry_index(_paired(), epoch_seconds=3.0)
