"""Frame encoding, delay geometry, photodetection, and dot-product recovery."""

import math

import numpy as np
import pytest

from combperceptron.errors import DomainError, RecoveryError
from combperceptron.photonics import ShaperConfig, shape_for_model
from combperceptron.signalchain import (
    ElectricalWaveform,
    FiberSpec,
    ImpairmentConfig,
    WaveformSpec,
    awg_quantize,
    bias_range,
    broadcast_modulate,
    channel_delay_s,
    channel_delays_s,
    correlation_slots,
    decode_bias_level,
    delay_step_s,
    delayed_channels_on_grid,
    encode_bias_level,
    encode_waveform,
    lowpass_single_pole,
    photodetect,
    run_perceptron,
    sample_and_recover,
    snr_required_for_bits,
)

SPEC = WaveformSpec()
FIBER = FiberSpec()
IDEAL = ImpairmentConfig.ideal()


def ideal_shaped(weights):
    return shape_for_model(np.asarray(weights, dtype=float), shaper=ShaperConfig.ideal())


def test_symbol_duration():
    # 5 samples at 59.421642 GS/s
    assert SPEC.symbol_duration_s * 1e12 == pytest.approx(84.14442670567738, rel=1e-12)


def test_waveform_spec_validation():
    with pytest.raises(DomainError):
        WaveformSpec(samples_per_symbol=0)
    with pytest.raises(DomainError):
        WaveformSpec(sample_rate_hz=0.0)
    with pytest.raises(DomainError):
        WaveformSpec(awg_bits=0)


def test_fiber_time_of_flight():
    assert FIBER.time_of_flight_s() * 1e6 == pytest.approx(63.65737192761534, rel=1e-12)


def test_fiber_validation():
    with pytest.raises(DomainError):
        FiberSpec(delay_mode="exact")
    with pytest.raises(DomainError):
        FiberSpec(delay_jitter_ps_sigma=-1.0)


def test_awg_quantize_grid():
    vals = np.random.default_rng(0).random(100)
    q = awg_quantize(vals, 8)
    np.testing.assert_array_equal(q * 255, np.round(q * 255))
    assert awg_quantize(np.array([1.0 / 512.0]), 8)[0] == 0.0  # below half an LSB
    assert awg_quantize(np.array([1.0]), 8)[0] == 1.0
    assert awg_quantize(np.array([0.0]), 8)[0] == 0.0


def test_bias_range_power_of_two():
    assert bias_range(0.0) == (-1.0, 1.0)
    assert bias_range(-0.99) == (-1.0, 1.0)
    assert bias_range(1.0) == (-1.0, 1.0)
    assert bias_range(1.5) == (-2.0, 2.0)
    assert bias_range(2.0) == (-2.0, 2.0)
    assert bias_range(-5.0) == (-8.0, 8.0)


def test_bias_level_roundtrip():
    for bias in (-0.37, 0.0, 0.25, 0.9, 3.1):
        lo, hi = bias_range(bias)
        level = encode_bias_level(bias, lo, hi)
        assert 0.0 <= level <= 1.0
        assert decode_bias_level(level, lo, hi) == pytest.approx(bias, abs=1e-15)


def test_encode_waveform_layout():
    x = np.random.default_rng(1).random(49)
    wave = encode_waveform(x, 0.0, SPEC, IDEAL)
    assert wave.samples.shape == (260,)  # (49 + 3 pads) * 5
    sym = wave.samples.reshape(52, 5)
    np.testing.assert_array_equal(sym, np.repeat(sym[:, :1], 5, axis=1))  # stepwise
    np.testing.assert_array_equal(sym[:49, 0], x)
    assert wave.frame.pad_symbols == (1.0, 1.0, 0.5)  # trigger, reference, bias 0
    assert wave.frame.n_data_symbols == 49


def test_encode_waveform_quantizes_all_symbols():
    x = np.random.default_rng(2).random(10)
    wave = encode_waveform(x, 0.3, SPEC, ImpairmentConfig(awg_quantize=True))
    levels = wave.samples.reshape(-1, 5)[:, 0]
    np.testing.assert_array_equal(levels * 255, np.round(levels * 255))
    # recorded pad level is the post-quantization value the detector will see
    assert wave.frame.pad_symbols[2] * 255 == np.round(wave.frame.pad_symbols[2] * 255)


def test_encode_waveform_rejects_out_of_range():
    with pytest.raises(DomainError):
        encode_waveform(np.array([0.5, 1.1]), 0.0, SPEC, IDEAL)
    with pytest.raises(DomainError):
        encode_waveform(np.array([-0.01]), 0.0, SPEC, IDEAL)
    with pytest.raises(DomainError):
        encode_waveform(np.array([]), 0.0, SPEC, IDEAL)


def test_encode_waveform_wide_bias_recorded():
    wave = encode_waveform(np.array([0.5]), 3.0, SPEC, IDEAL)
    assert wave.frame.bias_min == -4.0 and wave.frame.bias_max == 4.0


def test_lowpass_step_response():
    alpha = 1.0 - math.exp(-2.0 * math.pi * 25e9 / 59.421642e9)
    assert alpha == pytest.approx(0.9288862895756893, rel=1e-12)
    step = np.ones(10)
    out = lowpass_single_pole(step, 25e9, 59.421642e9)
    assert out[0] == pytest.approx(alpha)
    assert np.all(np.diff(out) > 0) and out[-1] < 1.0
    np.testing.assert_allclose(out, 1.0 - (1.0 - alpha) ** np.arange(1, 11), rtol=1e-12)


def test_delay_step_nominal_and_dispersion():
    assert delay_step_s(SPEC, FIBER) == SPEC.symbol_duration_s
    shaped = ideal_shaped(np.ones(3))
    disp = FiberSpec(delay_mode="dispersion_derived")
    # 17 ps/nm/km * 13 km * (48.9 GHz line spacing at 1550 nm => 0.3919 nm)
    assert delay_step_s(SPEC, disp, shaped) * 1e12 == pytest.approx(
        86.60517153503575, rel=1e-12
    )
    with pytest.raises(DomainError):
        delay_step_s(SPEC, disp, None)


def test_channel_delay_values():
    n = 49
    assert channel_delay_s(n, n, SPEC, FIBER) == 0.0
    assert channel_delay_s(1, n, SPEC, FIBER) * 1e9 == pytest.approx(
        4.038932481872513, rel=1e-12
    )
    with pytest.raises(IndexError):
        channel_delay_s(0, n, SPEC, FIBER)
    with pytest.raises(IndexError):
        channel_delay_s(n + 1, n, SPEC, FIBER)


def test_channel_delays_jitter():
    jit = FiberSpec(delay_jitter_ps_sigma=0.5)
    with pytest.raises(DomainError):
        channel_delays_s(5, SPEC, jit)
    a = channel_delays_s(5, SPEC, jit, rng=np.random.default_rng(9))
    b = channel_delays_s(5, SPEC, jit, rng=np.random.default_rng(9))
    clean = channel_delays_s(5, SPEC, FIBER)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, clean)
    assert np.abs(a - clean).max() < 5e-12  # jitter stays near the nominal grid


def test_delayed_channels_on_grid_shifts():
    tau = SPEC.symbol_duration_s
    channels = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    grid = delayed_channels_on_grid(channels, np.array([tau, 0.0]), SPEC)
    assert grid.shape == (2, 8)  # shift of 5 samples plus 3 original
    np.testing.assert_array_equal(grid[1, :3], channels[1])
    np.testing.assert_array_equal(grid[0, 5:], channels[0])
    np.testing.assert_array_equal(grid[0, :5], 0.0)


def test_photodetect_identity_and_superposition():
    x = np.random.default_rng(3).random(20)
    one = photodetect(x[None, :], np.array([0.0]), SPEC, IDEAL)
    np.testing.assert_array_equal(one.samples, x)
    two = photodetect(np.vstack([x, x]), np.zeros(2), SPEC, IDEAL)
    np.testing.assert_array_equal(two.samples, 2.0 * x)


def test_photodetect_three_channel_hand_case():
    # powers (0.5, 1, 0.25) against symbols (0.2, 0.4, 0.8): the five
    # correlation slots are 0.05, 0.3, 0.7, 1.0, 0.4 with the dot at center
    p = np.array([0.5, 1.0, 0.25])
    x = np.array([0.2, 0.4, 0.8])
    channels = p[:, None] * np.repeat(x, SPEC.samples_per_symbol)[None, :]
    tau = SPEC.symbol_duration_s
    det = photodetect(channels, np.array([2 * tau, tau, 0.0]), SPEC, IDEAL)
    slots = correlation_slots(det, 3, SPEC.samples_per_symbol)
    np.testing.assert_allclose(slots, [0.05, 0.3, 0.7, 1.0, 0.4], atol=1e-15)
    assert slots[1] == pytest.approx(p[2] * x[1] + p[1] * x[0], abs=1e-15)


def test_photodetect_noise_clamped_and_seeded():
    x = np.full((1, 50), 1e-3)
    noisy = ImpairmentConfig(electrical_snr_db=3.0, seed=4)
    det = photodetect(x, np.zeros(1), SPEC, noisy)
    assert det.samples.min() >= 0.0
    again = photodetect(x, np.zeros(1), SPEC, noisy)
    np.testing.assert_array_equal(det.samples, again.samples)


def test_correlation_matches_brute_force():
    """All 2N-1 detected slots equal the direct sliding correlation.

    Channels carry the data symbols only; the trailing pad symbols are a
    framing detail that lands in slots N and beyond, so the data-only
    property is checked on bare stepwise envelopes.
    """
    for n in range(1, 17):
        rng = np.random.default_rng(n)
        powers = rng.uniform(0.05, 1.0, n)
        x = rng.random(n)
        stream = np.repeat(x, SPEC.samples_per_symbol)
        channels = powers[:, None] * stream[None, :]
        delays = channel_delays_s(n, SPEC, FIBER)
        det = photodetect(channels, delays, SPEC, IDEAL)
        slots = correlation_slots(det, n, SPEC.samples_per_symbol)

        expected = np.zeros(2 * n - 1)
        for s in range(2 * n - 1):
            for k in range(1, n + 1):
                j = s - (n - k)
                if 0 <= j < n:
                    expected[s] += powers[k - 1] * x[j]
        np.testing.assert_allclose(slots, expected, atol=1e-12)


def test_sample_and_recover_errors():
    shaped = ideal_shaped(np.ones(3))
    det = ElectricalWaveform(samples=np.zeros(30), sample_rate_hz=1e9, frame=None)
    with pytest.raises(RecoveryError):
        sample_and_recover(det, shaped, SPEC, 1.0)
    wave = encode_waveform(np.zeros(3), 0.0, SPEC, IDEAL)
    det = photodetect(
        broadcast_modulate(wave, shaped), channel_delays_s(3, SPEC, FIBER), SPEC, IDEAL,
        frame=wave.frame,
    )
    with pytest.raises(RecoveryError):
        sample_and_recover(det, shaped, SPEC, 0.0)


def test_run_perceptron_zero_input():
    shaped = ideal_shaped(np.array([0.3, 0.6, 0.9]))
    pred = run_perceptron(np.zeros(3), 0.25, shaped, SPEC, FIBER, IDEAL)
    assert pred.dot_product_estimate == 0.0
    assert pred.score == 0.25
    assert pred.bias_recovered == 0.25
    assert pred.predicted_class == 1
    neg = run_perceptron(np.zeros(3), -0.25, shaped, SPEC, FIBER, IDEAL)
    assert neg.predicted_class == 0


def test_run_perceptron_one_hot():
    w = np.zeros(8)
    w[5] = 0.7
    shaped = ideal_shaped(w)
    x = np.random.default_rng(6).random(8)
    pred = run_perceptron(x, 0.0, shaped, SPEC, FIBER, IDEAL)
    assert pred.dot_product_estimate == pytest.approx(0.7 * x[5], rel=1e-12)


def test_run_perceptron_matches_digital_ideal():
    rng = np.random.default_rng(7)
    for _ in range(10):
        n = int(rng.integers(1, 65))
        w = rng.random(n)
        x = rng.random(n)
        shaped = ideal_shaped(w)
        pred = run_perceptron(x, 0.25, shaped, SPEC, FIBER, IDEAL)
        dot = float(w @ x)
        assert pred.dot_product_estimate == pytest.approx(dot, rel=1e-9, abs=1e-12)
        assert pred.score == pytest.approx(dot + 0.25, rel=1e-9)
        assert pred.predicted_class == (1 if dot + 0.25 > 0 else 0)


def test_run_perceptron_class_scale_invariance():
    rng = np.random.default_rng(8)
    for _ in range(5):
        w = rng.random(12)
        x = rng.random(12)
        bias = float(rng.uniform(-2.0, 0.0))
        classes = set()
        for c in (0.5, 1.0, 3.0):
            pred = run_perceptron(x, c * bias, ideal_shaped(c * w), SPEC, FIBER, IDEAL)
            classes.add(pred.predicted_class)
        assert len(classes) == 1


def test_run_perceptron_deterministic_per_sample():
    w = np.random.default_rng(123).random(49)
    x = np.random.default_rng(124).random(49)
    shaped = shape_for_model(w, calibration_seed=3)
    imp = ImpairmentConfig(electrical_snr_db=48.0, awg_quantize=True, seed=0)
    a = run_perceptron(x, -0.37, shaped, SPEC, FIBER, imp, sample_index=5)
    b = run_perceptron(x, -0.37, shaped, SPEC, FIBER, imp, sample_index=5)
    c = run_perceptron(x, -0.37, shaped, SPEC, FIBER, imp, sample_index=6)
    assert a.dot_product_estimate == b.dot_product_estimate
    assert a.dot_product_estimate != c.dot_product_estimate


def test_run_perceptron_realistic_regression():
    # pinned output of the full noisy chain for one seeded draw
    rng = np.random.default_rng(123)
    w = rng.random(49)
    x = rng.random(49)
    shaped = shape_for_model(w, calibration_seed=3)
    imp = ImpairmentConfig(electrical_snr_db=48.0, awg_quantize=True, seed=0)
    pred = run_perceptron(x, -0.37, shaped, SPEC, FIBER, imp, sample_index=5)
    assert pred.dot_product_estimate == pytest.approx(12.388673441600613, rel=1e-9)
    assert pred.bias_recovered == pytest.approx(-0.37254901960784315, rel=1e-12)
    assert abs(pred.bias_recovered - (-0.37)) <= 2.0 / 255.0 / 2.0 + 1e-12
    assert pred.predicted_class == 1
    assert abs(pred.dot_product_estimate - float(w @ x)) / float(w @ x) < 0.01


def test_run_perceptron_quantized_bias_recovery():
    shaped = ideal_shaped(np.ones(4))
    imp = ImpairmentConfig(awg_quantize=True)
    pred = run_perceptron(np.zeros(4), 0.3, shaped, SPEC, FIBER, imp)
    # recovered bias is the 8-bit level the hardware actually emitted
    assert abs(pred.bias_recovered - 0.3) <= 2.0 / 255.0


def test_run_perceptron_traces():
    w = np.random.default_rng(9).random(49)
    shaped = ideal_shaped(w)
    x = np.random.default_rng(10).random(49)
    pred = run_perceptron(x, 0.0, shaped, SPEC, FIBER, IDEAL, keep_traces=True)
    assert pred.traces["encoded"].samples.shape == (260,)
    assert pred.traces["channels"].shape == (49, 260)
    # grid: 48 symbol shifts ahead of the 52-symbol frame
    assert pred.traces["detected"].samples.shape == (500,)
    assert pred.traces["detected"].samples.min() >= 0.0


def test_run_perceptron_dispersion_mode_runs():
    w = np.random.default_rng(11).random(16)
    x = np.random.default_rng(12).random(16)
    disp = FiberSpec(delay_mode="dispersion_derived")
    pred = run_perceptron(x, 0.0, ideal_shaped(w), SPEC, disp, IDEAL)
    assert math.isfinite(pred.dot_product_estimate)
    assert pred.reference_value > 0.0


def test_snr_required_for_bits():
    assert snr_required_for_bits(8) == pytest.approx(48.16479930623699, rel=1e-12)
    assert snr_required_for_bits(1) == pytest.approx(6.020599913279624, rel=1e-12)
    assert snr_required_for_bits(11) == pytest.approx(66.22659904607586, rel=1e-12)
    with pytest.raises(DomainError):
        snr_required_for_bits(0)
