import warnings

import numpy as np
import pytest

from anxeeg.errors import DegenerateSignalError, DegenerateSignalWarning, FeatureError
from anxeeg.features import qeeg as q
from anxeeg.recording import EEG_CHANNELS, HEMISPHERE_PAIRS

FS = 128.0


def _t(seconds):
    return np.arange(int(seconds * FS)) / FS


def test_tone_peak_bin():
    psd = q.welch_psd(np.sin(2 * np.pi * 10 * _t(30)), FS)
    peak = psd.freqs[np.argmax(psd.power[0])]
    assert abs(peak - 10.0) <= psd.resolution / 2


def test_resolution_for_long_trials():
    psd = q.welch_psd(np.zeros((1, 640)) + np.arange(640), FS)
    assert psd.resolution <= 0.5
    assert psd.freqs[-1] == FS / 2


def test_white_noise_flat_within_3db():
    spectra = []
    for seed in range(20):
        x = np.random.default_rng(seed).standard_normal(int(30 * FS))
        spectra.append(q.welch_psd(x, FS).power[0])
    psd = q.welch_psd(np.zeros(int(30 * FS)), FS)
    mean = np.mean(spectra, axis=0)
    band = q.band_mask(psd.freqs, 4.0, 45.0, closed=True)
    db = 10 * np.log10(mean[band] / np.mean(mean[band]))
    assert np.max(np.abs(db)) < 3.0


@pytest.mark.parametrize("seed", range(5))
def test_parseval(seed):
    x = np.random.default_rng(seed).standard_normal((3, int(30 * FS)))
    psd = q.welch_psd(x, FS)
    integral = psd.power.sum(axis=1) * psd.resolution
    np.testing.assert_allclose(integral, np.mean(x * x, axis=1), rtol=0.02)


def test_segment_longer_than_trial():
    with pytest.raises(FeatureError, match="longer than"):
        q.welch_psd(np.ones(100), FS, segment_len=256)


def test_white_noise_wiener_entropy():
    x = np.random.default_rng(1).standard_normal((14, int(30 * FS)))
    spec = q.spectral_features(q.welch_psd(x, FS))
    for band in spec.values():
        assert np.all(band["wiener_entropy"] > 0.9)


def test_alpha_tone():
    spec = q.spectral_features(q.welch_psd(np.sin(2 * np.pi * 10 * _t(30)), FS))
    assert spec["alpha"]["rel_power"][0] > 0.95
    assert spec["alpha"]["wiener_entropy"][0] < 0.2


def test_relative_powers_sum_to_one(trial_data):
    spec = q.spectral_features(q.welch_psd(trial_data, FS))
    total = sum(v["rel_power"] for v in spec.values())
    np.testing.assert_allclose(total, 1.0, atol=1e-6)


def test_zero_total_power():
    with pytest.raises(DegenerateSignalError, match="zero total spectral power"):
        q.spectral_features(q.welch_psd(np.zeros((1, 256)), FS))


def test_wiener_entropy_range(rng):
    p = rng.random((5, 40))
    w = q.wiener_entropy(p)
    assert np.all((w > 0) & (w <= 1))
    assert q.wiener_entropy(np.ones(10)) == pytest.approx(1.0)


def test_spectral_difference_stationary_vs_switching():
    t = _t(30)
    steady = np.sin(2 * np.pi * 10 * t)
    switching = np.where((t // 2) % 2 == 0, 1.0, 0.1) * steady
    a = q.spectral_features(q.welch_psd(steady, FS))["alpha"]["spectral_difference"][0]
    b = q.spectral_features(q.welch_psd(switching, FS))["alpha"]["spectral_difference"][0]
    assert a < 1e-6 < b


def test_cutoff_frequency_bounds(trial_data):
    fc = q.cutoff_frequency(q.welch_psd(trial_data, FS))
    assert np.all((fc >= 4.0) & (fc <= 45.0))


def test_sine_skewness_near_zero():
    assert abs(q.amplitude_features(np.sin(2 * np.pi * 10 * _t(10)))["skewness"]) < 0.05


def test_sine_envelope_constant():
    a = q.amplitude_features(3 * np.sin(2 * np.pi * 10 * _t(10)))
    assert a["envelope_sd"] / a["envelope_mean"] < 0.05


def test_doubling_quadruples_total_power(rng):
    x = rng.standard_normal(512)
    assert q.amplitude_features(2 * x)["total_power"] == pytest.approx(
        4 * q.amplitude_features(x)["total_power"], rel=1e-12)


def test_unbiased_sd(rng):
    x = rng.standard_normal(50)
    assert q.amplitude_features(x)["sd"] == pytest.approx(np.std(x, ddof=1))


def test_constant_input_skewness_flagged():
    with pytest.warns(DegenerateSignalWarning):
        a = q.amplitude_features(np.full(64, 2.0))
    assert a["skewness"] == 0.0 and a["kurtosis"] == 0.0


def test_identical_hemispheres(rng):
    x = rng.standard_normal(int(10 * FS))
    px = q.welch_psd(x, FS).power[0]
    assert q.brain_symmetry_index(px, px) == 0.0
    assert q.envelope_correlation(x, x) == pytest.approx(1.0)
    assert q.max_correlation_lag(x, x, 64) == 0
    _, coh = q.coherence_spectrum(x, x, FS)
    np.testing.assert_allclose(coh, 1.0, atol=1e-9)


def test_independent_noise_low_coherence(rng):
    n = int(30 * FS)
    f, coh = q.coherence_spectrum(rng.standard_normal(n), rng.standard_normal(n), FS)
    seg = int(min(2 * FS, max(n // 4, 8)))
    assert (n - seg) // (seg // 2) + 1 >= 8
    assert coh.mean() < 0.35


@pytest.mark.parametrize("delay", [8, -5, 0])
def test_delay_recovered(rng, delay):
    left = rng.standard_normal(3840)
    right = np.roll(left, delay)
    assert q.max_correlation_lag(left, right, 64) == delay


def test_bsi_bounds(rng):
    for _ in range(50):
        a, b = rng.random(30), rng.random(30)
        assert 0.0 <= q.brain_symmetry_index(a, b) <= 1.0


def test_constant_reeg_degenerate():
    with pytest.raises(DegenerateSignalError, match="degenerate"):
        q.reeg_features(np.full(1280, 4.0), FS)


@pytest.mark.parametrize("c", [0.5, 3.0, 20.0])
def test_reeg_of_sine(c):
    r = q.reeg_features(c * np.sin(2 * np.pi * 10 * _t(30)), FS)
    assert r["median"] == pytest.approx(2 * c, rel=0.05)
    assert r["p5"] == pytest.approx(2 * c, rel=0.05)


def test_reeg_single_window_fallback(rng):
    x = rng.standard_normal(128)
    r = q.reeg_features(x, FS)
    assert r["mean"] == pytest.approx(np.ptp(x))
    assert r["sd"] == 0.0


def test_reeg_order_statistics(rng):
    for _ in range(50):
        x = rng.standard_normal(int(rng.integers(128, 3840))) * rng.uniform(0.1, 10)
        r = q.reeg_features(x, FS)
        assert r["p95"] >= r["median"] >= r["p5"]
        assert r["bandwidth"] >= 0


def test_table_rows_partition_emitted_keys():
    table = q.qeeg_table(np.random.default_rng(0).standard_normal((14, 640)), FS)
    listed = [k for _, keys in q.QEEG_ROWS.values() for k in keys]
    assert sorted(q.QEEG_ROWS) == list(range(1, 16))
    assert len(listed) == len(set(listed))
    assert set(listed) == set(table)
    for rows_key in listed:
        assert q.row_of(rows_key) in q.QEEG_ROWS


def test_reduced_vector_covers_every_row(trial_data):
    reduced = set(q.REDUCED_PER_BAND) | set(q.REDUCED_SCALARS)
    covered = {q.row_of(k) for k in reduced}
    # row 15 (p95 - p5) is left out: after averaging it is p95 minus p5 exactly
    assert covered == set(range(1, 15))
    t = q.qeeg_table(trial_data, FS)
    assert np.mean(t["reeg_bandwidth"]) == pytest.approx(
        np.mean(t["reeg_p95"]) - np.mean(t["reeg_p5"]))
    assert set(q.INFERRED_KEYS) <= {k for _, ks in q.QEEG_ROWS.values() for k in ks}


def test_reduced_dimension(trial_data):
    v = q.qeeg_vector(trial_data, FS)
    assert len(v) == 25 and v.names == q.reduced_names()
    assert np.all(np.isfinite(v.values))


def test_full_vector_flag(trial_data):
    v = q.qeeg_full_vector(trial_data, FS)
    assert len(v) == len(set(v.names))
    assert np.all(np.isfinite(v.values))


def test_missing_pair_channel(trial_data):
    with pytest.raises(FeatureError, match="missing pair channel"):
        q.qeeg_table(trial_data[:13], FS, EEG_CHANNELS[:13], HEMISPHERE_PAIRS)


def test_manifest_rows_match_reduced_names():
    rows = q.feature_manifest_rows()
    assert tuple(r[0] for r in rows) == q.reduced_names()


def test_fuzz_finite_and_bounded():
    """1000 random two-channel trials of varied length and scale."""
    rng = np.random.default_rng(99)
    pair = (("AF3", "AF4"),)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateSignalWarning)
        for _ in range(1000):
            n = int(rng.choice([128, 256, 640]))
            scale = 10 ** rng.uniform(-2, 2)
            x = scale * rng.standard_normal((2, n))
            if rng.random() < 0.3:
                x[1] = 0.5 * x[0] + 0.5 * x[1]
            t = q.qeeg_table(x, FS, ("AF3", "AF4"), pair)
            for k, v in t.items():
                assert np.all(np.isfinite(v)), k
            assert np.all((t["bsi"] >= 0) & (t["bsi"] <= 1))
            assert np.all((t["coherence_mean"] >= 0) & (t["coherence_max"] <= 1))
            assert np.all(np.abs(t["env_corr"]) <= 1)
            assert np.all(np.abs(t["xcorr_lag"]) <= FS / 2)
