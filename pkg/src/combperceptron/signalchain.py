"""Time-domain model of the broadcast-and-delay dot-product engine.

One stepwise electrical waveform carries the feature vector plus three pad
symbols (trigger, reference, bias).  It modulates every comb line at once;
line k then travels (N - k) delay steps further than line N, so after
photodetection the output stream is the sliding correlation of the line
powers with the input symbols.  The slot where all N weighted copies
overlap holds the dot product.

Scale recovery: the detected slot value lives in detector units.  A
full-scale calibration frame (every data symbol at the reference level)
is sent through the identical chain; its overlap slot measures the
response to a unit input summed over all lines.  Dividing the data slot
by that reference and multiplying by the comb's realized weight sum
returns the dot product in model units.  No single slot of the data frame
itself can serve: the progressive delays spread the in-frame pad symbols
over trailing slots that each see only the most-delayed lines.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, RecoveryError
from .validation import as_float_vector, check_unit_range

SPEED_OF_LIGHT_M_S = 299792458.0

# pad symbols appended after the data, in frame order
TRIGGER_LEVEL = 1.0
REFERENCE_LEVEL = 1.0
N_PAD_SYMBOLS = 3

DELAY_MODES = ("nominal_tau", "dispersion_derived")


@dataclass
class WaveformSpec:
    """Arbitrary-waveform-generator settings for the input stream."""

    sample_rate_hz: float = 59.421642e9
    samples_per_symbol: int = 5
    awg_bits: int = 8
    analog_bandwidth_hz: float = 25e9

    def __post_init__(self):
        if self.samples_per_symbol < 1:
            raise DomainError(
                f"samples_per_symbol must be >= 1, got {self.samples_per_symbol}"
            )
        if not self.sample_rate_hz > 0:
            raise DomainError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        if self.awg_bits < 1:
            raise DomainError(f"awg_bits must be >= 1, got {self.awg_bits}")

    @property
    def symbol_duration_s(self):
        # 5 samples at 59.421642 GS/s ~ 84.14 ps per symbol
        return self.samples_per_symbol / self.sample_rate_hz


@dataclass
class FiberSpec:
    """Dispersive delay line shared by all channels."""

    length_km: float = 13.0
    dispersion_ps_per_nm_km: float = 17.0
    delay_mode: str = "nominal_tau"
    delay_jitter_ps_sigma: float = 0.0
    group_index: float = 1.468

    def __post_init__(self):
        if self.delay_mode not in DELAY_MODES:
            raise DomainError(
                f"delay_mode must be one of {DELAY_MODES}, got {self.delay_mode!r}"
            )
        if self.delay_jitter_ps_sigma < 0:
            raise DomainError("delay_jitter_ps_sigma must be >= 0")

    def time_of_flight_s(self):
        """Propagation time through the fiber (sets latency, not alignment)."""
        return self.length_km * 1e3 * self.group_index / SPEED_OF_LIGHT_M_S


@dataclass
class ImpairmentConfig:
    """Which non-idealities the chain applies."""

    electrical_snr_db: float = math.inf
    awg_quantize: bool = True
    bandwidth_filter: bool = False
    seed: int = 0

    @classmethod
    def ideal(cls):
        return cls(electrical_snr_db=math.inf, awg_quantize=False,
                   bandwidth_filter=False, seed=0)


@dataclass
class FrameInfo:
    """Symbol layout of an encoded frame, carried with every waveform."""

    n_data_symbols: int
    samples_per_symbol: int
    pad_symbols: tuple = None  # (trigger, reference, bias level) as encoded
    bias_min: float = -1.0
    bias_max: float = 1.0


@dataclass
class ElectricalWaveform:
    samples: np.ndarray
    sample_rate_hz: float
    frame: FrameInfo = None


@dataclass
class PhotonicPrediction:
    """Recovered output of one sample pushed through the chain."""

    dot_product_estimate: float
    score: float
    predicted_class: int
    center_value: float
    reference_value: float
    bias_recovered: float
    traces: dict = field(default_factory=dict)


def awg_quantize(values, bits):
    """Round to the 2**bits uniform levels spanning [0, 1]."""
    levels = 2**bits - 1
    return np.round(np.asarray(values, dtype=np.float64) * levels) / levels


def bias_range(bias):
    """Symmetric power-of-two range [-B, B] that contains the bias.

    A power-of-two half-range keeps the affine map to [0, 1] essentially
    exact in binary floating point.
    """
    magnitude = abs(float(bias))
    if magnitude <= 1.0:
        return -1.0, 1.0
    half = 2.0 ** math.ceil(math.log2(magnitude))
    return -half, half


def encode_bias_level(bias, bias_min, bias_max):
    return (bias - bias_min) / (bias_max - bias_min)


def decode_bias_level(level, bias_min, bias_max):
    return bias_min + level * (bias_max - bias_min)


def lowpass_single_pole(samples, cutoff_hz, sample_rate_hz):
    """First-order low-pass, the usual model for limited analog bandwidth."""
    alpha = 1.0 - math.exp(-2.0 * math.pi * cutoff_hz / sample_rate_hz)
    out = np.empty_like(samples)
    state = 0.0
    for i, x in enumerate(samples):
        state += alpha * (x - state)
        out[i] = state
    return out


def encode_waveform(x, bias, spec, impairments):
    """Build the stepwise frame: N data symbols then trigger/reference/bias.

    Every feature must lie in [0, 1].  The bias is mapped affinely onto
    [0, 1] (range recorded in the frame metadata) so it can ride in-band.
    Quantization snaps all symbol levels to the AWG's uniform grid.
    """
    x = as_float_vector(x, "x")
    if x.shape[0] < 1:
        raise DomainError("need at least one data symbol")
    check_unit_range(x, "x")

    bias_min, bias_max = bias_range(bias)
    levels = np.concatenate(
        [x, [TRIGGER_LEVEL, REFERENCE_LEVEL, encode_bias_level(bias, bias_min, bias_max)]]
    )
    if impairments.awg_quantize:
        levels = awg_quantize(levels, spec.awg_bits)

    samples = np.repeat(levels, spec.samples_per_symbol)
    if impairments.bandwidth_filter:
        samples = lowpass_single_pole(
            samples, spec.analog_bandwidth_hz, spec.sample_rate_hz
        )

    frame = FrameInfo(
        n_data_symbols=x.shape[0],
        samples_per_symbol=spec.samples_per_symbol,
        pad_symbols=(float(levels[-3]), float(levels[-2]), float(levels[-1])),
        bias_min=bias_min,
        bias_max=bias_max,
    )
    return ElectricalWaveform(samples=samples, sample_rate_hz=spec.sample_rate_hz,
                              frame=frame)


def broadcast_modulate(waveform, shaped):
    """Imprint the one waveform onto every weighted comb line.

    Returns an (n_lines, n_samples) array of optical power envelopes.
    """
    if waveform.frame is not None and waveform.frame.n_data_symbols != shaped.n_lines:
        raise DomainError(
            f"frame carries {waveform.frame.n_data_symbols} data symbols for "
            f"a comb with {shaped.n_lines} lines"
        )
    return shaped.line_powers_linear[:, None] * waveform.samples[None, :]


def delay_step_s(spec, fiber, shaped=None):
    """Per-channel-index delay increment.

    nominal_tau uses exactly one symbol duration.  dispersion_derived uses
    D * L * dlambda with dlambda = fsr * lambda^2 / c, which lands near
    86.6 ps at the defaults and exposes the walk-off against the 84.14 ps
    symbol clock.
    """
    if fiber.delay_mode == "nominal_tau":
        return spec.symbol_duration_s
    if shaped is None:
        raise DomainError("dispersion_derived delays need the shaped comb's grid")
    dlambda_m = (
        shaped.fsr_hz * shaped.center_wavelength_m**2 / SPEED_OF_LIGHT_M_S
    )
    step_ps = fiber.dispersion_ps_per_nm_km * fiber.length_km * (dlambda_m * 1e9)
    return step_ps * 1e-12


def channel_delay_s(k, n, spec, fiber, shaped=None):
    """Extra delay of channel k (1-based) relative to channel n: (n-k) steps."""
    if not 1 <= k <= n:
        raise IndexError(f"channel index {k} outside 1..{n}")
    return (n - k) * delay_step_s(spec, fiber, shaped)


def channel_delays_s(n, spec, fiber, shaped=None, rng=None):
    """Delays for channels 1..n, plus per-channel Gaussian jitter if set."""
    step = delay_step_s(spec, fiber, shaped)
    delays = (n - np.arange(1, n + 1, dtype=np.float64)) * step
    if fiber.delay_jitter_ps_sigma > 0.0:
        if rng is None:
            raise DomainError("delay jitter needs an rng")
        delays = delays + rng.normal(0.0, fiber.delay_jitter_ps_sigma * 1e-12, size=n)
    return delays


def delayed_channels_on_grid(channels, delays_s, spec):
    """Shift each stepwise envelope onto the common detected-sample grid.

    Shifts round to the nearest sample, which is exact in nominal mode
    where every delay is a whole number of symbols.  Returns an
    (n_lines, grid_length) array.
    """
    channels = np.asarray(channels, dtype=np.float64)
    if channels.ndim != 2:
        raise DomainError(f"channels must be 2-D, got shape {channels.shape}")
    n_lines, n_samples = channels.shape
    delays_s = as_float_vector(delays_s, "delays_s")
    if delays_s.shape[0] != n_lines:
        raise DomainError(f"{delays_s.shape[0]} delays for {n_lines} channels")

    shifts = np.maximum(
        0, np.round(delays_s * spec.sample_rate_hz).astype(np.int64)
    )
    grid_len = int(shifts.max()) + n_samples if n_lines else n_samples
    grid = np.zeros((n_lines, grid_len))
    for i in range(n_lines):
        s = int(shifts[i])
        grid[i, s : s + n_samples] = channels[i]
    return grid


def photodetect(channels, delays_s, spec, impairments, rng=None, frame=None):
    """Sum the delayed channel envelopes onto one detected waveform.

    With finite electrical SNR, white Gaussian noise with variance
    mean_signal_power / 10^(snr/10) is added once, then the output is
    clamped at zero since detected intensity cannot be negative.
    """
    grid = delayed_channels_on_grid(channels, delays_s, spec)
    out = np.zeros(grid.shape[1])
    for row in grid:
        out += row

    if math.isfinite(impairments.electrical_snr_db):
        if rng is None:
            rng = np.random.default_rng(impairments.seed)
        signal_power = float(np.mean(out**2))
        noise_sigma = math.sqrt(
            signal_power * 10.0 ** (-impairments.electrical_snr_db / 10.0)
        )
        out = out + rng.normal(0.0, noise_sigma, size=out.shape[0])
        out = np.maximum(out, 0.0)

    return ElectricalWaveform(samples=out, sample_rate_hz=spec.sample_rate_hz,
                              frame=frame)


def slot_midpoint(detected, slot_index, samples_per_symbol):
    """Sample value at the middle of a symbol slot of the detected stream."""
    idx = slot_index * samples_per_symbol + samples_per_symbol // 2
    if not 0 <= idx < detected.samples.shape[0]:
        raise DomainError(
            f"slot {slot_index} midpoint (sample {idx}) is outside the trace"
        )
    return float(detected.samples[idx])


def correlation_slots(detected, n, samples_per_symbol):
    """Midpoint samples of the 2N-1 sliding-correlation slots."""
    return np.array(
        [slot_midpoint(detected, s, samples_per_symbol) for s in range(2 * n - 1)]
    )


def reference_response(shaped, spec, fiber, impairments, delays_s, rng=None):
    """Overlap-slot response to a full-scale calibration frame.

    All data symbols sit at the reference level, so the center slot reads
    the chain's summed unit response (ideally the sum of line powers).
    The same fiber delays are reused; noise draws are fresh.
    """
    ones = np.full(shaped.n_lines, REFERENCE_LEVEL)
    wave = encode_waveform(ones, 0.0, spec, impairments)
    channels = broadcast_modulate(wave, shaped)
    detected = photodetect(channels, delays_s, spec, impairments, rng=rng,
                           frame=wave.frame)
    return slot_midpoint(detected, shaped.n_lines - 1, spec.samples_per_symbol)


def sample_and_recover(detected, shaped, spec, reference_value):
    """Read the overlap slot and rescale it into model units.

    dot = center / reference * weight_sum, where weight_sum is the comb's
    realized sum of weights.  The bias rides back via the frame metadata's
    encoded pad level and the inverse affine map.  A reference at or below
    zero cannot rescale anything and raises RecoveryError.
    """
    if detected.frame is None:
        raise RecoveryError("detected waveform carries no frame metadata")
    if reference_value <= 0.0:
        raise RecoveryError(
            f"reference response {reference_value} is not positive; cannot rescale"
        )
    frame = detected.frame
    center = slot_midpoint(detected, frame.n_data_symbols - 1,
                           frame.samples_per_symbol)
    dot = center / reference_value * shaped.weight_sum()
    bias = decode_bias_level(frame.pad_symbols[2], frame.bias_min, frame.bias_max)
    score = dot + bias
    return PhotonicPrediction(
        dot_product_estimate=dot,
        score=score,
        predicted_class=1 if score > 0.0 else 0,
        center_value=center,
        reference_value=reference_value,
        bias_recovered=bias,
    )


def run_perceptron(x, bias, shaped, spec=None, fiber=None, impairments=None,
                   sample_index=0, keep_traces=False):
    """Push one feature vector through the full chain and recover its score.

    Deterministic: the RNG stream is derived from the impairment seed and
    the sample index, so results do not depend on evaluation order.  Draw
    order within a sample is fixed: delay jitter, then data-frame noise,
    then calibration-frame noise.
    """
    spec = spec if spec is not None else WaveformSpec()
    fiber = fiber if fiber is not None else FiberSpec()
    impairments = impairments if impairments is not None else ImpairmentConfig()

    rng = np.random.default_rng(impairments.seed ^ sample_index)
    delays = channel_delays_s(shaped.n_lines, spec, fiber, shaped, rng=rng)

    encoded = encode_waveform(x, bias, spec, impairments)
    channels = broadcast_modulate(encoded, shaped)
    detected = photodetect(channels, delays, spec, impairments, rng=rng,
                           frame=encoded.frame)
    reference = reference_response(shaped, spec, fiber, impairments, delays, rng=rng)

    prediction = sample_and_recover(detected, shaped, spec, reference)
    if keep_traces:
        prediction.traces = {
            "encoded": encoded,
            "channels": channels,
            "detected": detected,
        }
    return prediction


def snr_required_for_bits(bits):
    """Electrical SNR (dB) that keeps noise below half an LSB of `bits`.

    20*log10(2^bits): 8 bits needs 48.16 dB.
    """
    if bits < 1:
        raise DomainError(f"bits must be >= 1, got {bits}")
    return 20.0 * math.log10(2.0**bits)
