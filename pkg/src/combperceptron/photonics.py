"""Comb source and spectral-shaping model.

A fixed grid of comb lines carries the weight vector as optical power.
Shaping happens in two stages with the same mechanism: first every line is
attenuated down to the weakest line (flattening), then the flat spectrum
is attenuated line by line in proportion to the weights.  A feedback loop
models the attenuate/measure/correct cycle of a programmable filter whose
applied loss has a systematic per-line error.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import jsonio
from .errors import DomainError, UnflattenableCombError
from .validation import as_float_vector

# correction gain of the feedback loop; full correction (1.0) would chase
# its own measurement noise, half-steps average it down instead
CALIBRATION_GAIN = 0.5


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=np.float64) / 10.0)


def linear_to_db(linear):
    return 10.0 * np.log10(np.asarray(linear, dtype=np.float64))


def sech2_profile(n_lines, peak_dbm=0.0, width_lines=20.0):
    """Raw comb powers (dBm) with the sech^2 envelope of a soliton state."""
    k = np.arange(n_lines, dtype=np.float64)
    center = (n_lines - 1) / 2.0
    envelope = 1.0 / np.cosh((k - center) / width_lines) ** 2
    return peak_dbm + 10.0 * np.log10(envelope)


@dataclass
class CombSpec:
    """Comb line grid: 49 lines on a 48.9 GHz spacing near 1550 nm."""

    n_lines: int = 49
    fsr_hz: float = 48.9e9
    center_wavelength_m: float = 1550e-9
    raw_line_powers_dbm: np.ndarray = None

    def __post_init__(self):
        if self.n_lines < 1:
            raise DomainError(f"n_lines must be >= 1, got {self.n_lines}")
        if not self.fsr_hz > 0:
            raise DomainError(f"fsr_hz must be positive, got {self.fsr_hz}")
        if self.raw_line_powers_dbm is None:
            self.raw_line_powers_dbm = np.zeros(self.n_lines)
        self.raw_line_powers_dbm = as_float_vector(
            self.raw_line_powers_dbm, "raw_line_powers_dbm"
        )
        if self.raw_line_powers_dbm.shape[0] != self.n_lines:
            raise DomainError(
                f"raw_line_powers_dbm has {self.raw_line_powers_dbm.shape[0]} "
                f"entries for {self.n_lines} lines"
            )


@dataclass
class ShaperConfig:
    """Programmable-filter model: finite attenuation range plus loop noise."""

    attenuation_range_db: float = 35.0
    measurement_noise_sigma_db: float = 0.05
    loss_error_sigma_db: float = 0.2
    tolerance_db: float = 0.1
    max_iterations: int = 8

    def __post_init__(self):
        if not self.attenuation_range_db > 0:
            raise DomainError(
                f"attenuation_range_db must be positive, got {self.attenuation_range_db}"
            )
        if self.tolerance_db < 0:
            raise DomainError(f"tolerance_db must be >= 0, got {self.tolerance_db}")
        if self.max_iterations < 1:
            raise DomainError(f"max_iterations must be >= 1, got {self.max_iterations}")

    @classmethod
    def ideal(cls):
        """No range limit, no loop noise: shaping becomes exact."""
        return cls(
            attenuation_range_db=math.inf,
            measurement_noise_sigma_db=0.0,
            loss_error_sigma_db=0.0,
        )


def effective_weight_bits(attenuation_range_db):
    """Bit depth equivalent of an attenuation range in dB.

    Each weight bit halves the power, i.e. costs 10*log10(2) ~ 3.01 dB,
    so a 35 dB range resolves floor(35 / 3.0103) = 11 bits.
    """
    if not math.isfinite(attenuation_range_db) or attenuation_range_db <= 0:
        raise DomainError(
            f"attenuation_range_db must be finite and positive, got {attenuation_range_db}"
        )
    return int(math.floor(attenuation_range_db / (10.0 * math.log10(2.0))))


def flatten_comb(comb, shaper):
    """Attenuate every line down to the weakest raw line.

    Returns the flattened linear powers (all equal).  Lines sitting more
    than the attenuation range below the strongest line make the spectrum
    unflattenable, since the strong lines cannot be brought down to them.
    """
    raw_db = comb.raw_line_powers_dbm
    min_db = float(raw_db.min())
    max_db = float(raw_db.max())
    if math.isfinite(shaper.attenuation_range_db):
        if max_db - min_db > shaper.attenuation_range_db:
            weak = np.nonzero(max_db - raw_db > shaper.attenuation_range_db)[0]
            raise UnflattenableCombError(weak.tolist())
    return np.full(comb.n_lines, float(db_to_linear(min_db)))


@dataclass
class ShapedComb:
    """Comb after weight shaping: normalized line powers plus bookkeeping.

    line_powers_linear is normalized so the strongest line is 1.0;
    weight_scale is the weight that line represents, so the realized
    weight vector is weight_scale * line_powers_linear.
    """

    n_lines: int
    fsr_hz: float
    center_wavelength_m: float
    line_powers_linear: np.ndarray
    target_weights: np.ndarray
    weight_scale: float
    calibration_iterations: int = 0
    calibration_converged: bool = True
    calibration_history: dict = field(default_factory=dict)

    def weight_sum(self):
        """Sum of the realized weights; recovery rescales by this."""
        return float(self.weight_scale * np.sum(self.line_powers_linear))

    def realized_weights(self):
        return self.weight_scale * self.line_powers_linear

    def to_dict(self):
        return {
            "n_lines": self.n_lines,
            "fsr_hz": self.fsr_hz,
            "center_wavelength_m": self.center_wavelength_m,
            "line_powers_linear": [float(p) for p in self.line_powers_linear],
            "target_weights": [float(w) for w in self.target_weights],
            "weight_scale": self.weight_scale,
            "calibration": {
                "iterations": self.calibration_iterations,
                "converged": self.calibration_converged,
            },
        }

    @classmethod
    def from_dict(cls, doc):
        powers = as_float_vector(doc["line_powers_linear"], "line_powers_linear")
        weights = as_float_vector(doc["target_weights"], "target_weights")
        if powers.shape[0] != doc["n_lines"] or weights.shape[0] != doc["n_lines"]:
            raise DomainError("line/weight counts disagree with n_lines")
        cal = doc.get("calibration", {})
        return cls(
            n_lines=int(doc["n_lines"]),
            fsr_hz=float(doc["fsr_hz"]),
            center_wavelength_m=float(doc["center_wavelength_m"]),
            line_powers_linear=powers,
            target_weights=weights,
            weight_scale=float(doc["weight_scale"]),
            calibration_iterations=int(cal.get("iterations", 0)),
            calibration_converged=bool(cal.get("converged", True)),
        )


def save_shaped_comb(shaped, path):
    jsonio.dump(shaped.to_dict(), path)


def load_shaped_comb(path):
    return ShapedComb.from_dict(jsonio.load(path))


def shape_weights(comb, flat_powers, weights, shaper):
    """Shape a flattened comb so line powers carry the weight vector.

    Powers are proportional to the weights and normalized so the largest
    is 1.0.  A finite attenuation range clamps weights smaller than
    max * 10^(-range/10) to exactly zero and quantizes the rest to the
    uniform linear grid of effective_weight_bits(range) bits.
    """
    weights = as_float_vector(weights, "weights")
    if weights.shape[0] != comb.n_lines:
        raise DomainError(
            f"{weights.shape[0]} weights for a comb with {comb.n_lines} lines"
        )
    if np.any(weights < 0):
        bad = int(np.argmax(weights < 0))
        raise DomainError(
            f"weights[{bad}] = {weights[bad]} is negative; optical powers "
            "cannot carry negative weights"
        )
    flat_powers = as_float_vector(flat_powers, "flat_powers")
    if flat_powers.shape[0] != comb.n_lines:
        raise DomainError(
            f"flat_powers has {flat_powers.shape[0]} entries for {comb.n_lines} lines"
        )
    if flat_powers.size and not np.allclose(flat_powers, flat_powers[0]):
        raise DomainError("flat_powers must be a flattened (uniform) spectrum")

    w_max = float(weights.max())
    if w_max == 0.0:
        raise DomainError("all weights are zero; the comb would carry no signal")
    powers = weights / w_max

    if math.isfinite(shaper.attenuation_range_db):
        floor = 10.0 ** (-shaper.attenuation_range_db / 10.0)
        powers = np.where(powers < floor, 0.0, powers)
        bits = effective_weight_bits(shaper.attenuation_range_db)
        step = (1.0 - floor) / (2**bits - 1)
        on = powers > 0.0
        powers = np.where(on, floor + np.round((powers - floor) / step) * step, 0.0)

    return ShapedComb(
        n_lines=comb.n_lines,
        fsr_hz=comb.fsr_hz,
        center_wavelength_m=comb.center_wavelength_m,
        line_powers_linear=powers,
        target_weights=weights,
        weight_scale=w_max,
    )


@dataclass
class CalibrationResult:
    achieved_powers: np.ndarray
    iterations: int
    converged: bool
    max_abs_error_db: float
    history_max_db: list
    history_mean_db: list


def calibrate(target_powers, shaper, seed=0):
    """Feedback loop driving line powers onto their targets.

    Applying an attenuation incurs a systematic per-line error (Gaussian in
    dB, drawn once); each iteration measures the spectrum with fresh
    measurement noise and corrects by CALIBRATION_GAIN times the measured
    error.  Convergence means the true residual of every active line is
    within tolerance_db.  Lines with target 0 are blocked outright and do
    not participate.
    """
    target_powers = as_float_vector(target_powers, "target_powers")
    if np.any(target_powers < 0):
        raise DomainError("target powers must be nonnegative")
    on = target_powers > 0.0
    n_on = int(np.count_nonzero(on))
    rng = np.random.default_rng(seed)

    achieved = np.zeros_like(target_powers)
    if n_on == 0:
        return CalibrationResult(achieved, 1, True, 0.0, [0.0], [0.0])

    target_db = linear_to_db(target_powers[on])
    setting_db = target_db.copy()
    loss_offset_db = rng.normal(0.0, shaper.loss_error_sigma_db, size=n_on)

    history_max = []
    history_mean = []
    converged = False
    iterations = shaper.max_iterations
    for it in range(1, shaper.max_iterations + 1):
        achieved_db = setting_db + loss_offset_db
        true_error = achieved_db - target_db
        history_max.append(float(np.max(np.abs(true_error))))
        history_mean.append(float(np.mean(np.abs(true_error))))
        if history_max[-1] <= shaper.tolerance_db:
            converged = True
            iterations = it
            break
        measured = true_error + rng.normal(
            0.0, shaper.measurement_noise_sigma_db, size=n_on
        )
        setting_db = setting_db - CALIBRATION_GAIN * measured

    # a line whose final dB value equals its target exactly (the noiseless
    # path) gets the target power verbatim, avoiding db/linear round-off
    final_db = setting_db + loss_offset_db
    achieved[on] = np.where(
        final_db == target_db, target_powers[on], db_to_linear(final_db)
    )
    return CalibrationResult(
        achieved_powers=achieved,
        iterations=iterations,
        converged=converged,
        max_abs_error_db=history_max[-1],
        history_max_db=history_max,
        history_mean_db=history_mean,
    )


def apply_calibration(shaped, shaper, seed=0):
    """Run the feedback loop on a shaped comb and return the realized comb.

    The achieved powers are renormalized so the strongest line is 1.0;
    residual calibration error shows up as line-to-line power error.
    """
    result = calibrate(shaped.line_powers_linear, shaper, seed=seed)
    achieved = result.achieved_powers
    peak = float(achieved.max())
    if peak <= 0.0:
        raise DomainError("calibration produced an all-dark comb")
    return ShapedComb(
        n_lines=shaped.n_lines,
        fsr_hz=shaped.fsr_hz,
        center_wavelength_m=shaped.center_wavelength_m,
        line_powers_linear=achieved / peak,
        target_weights=shaped.target_weights,
        weight_scale=shaped.weight_scale,
        calibration_iterations=result.iterations,
        calibration_converged=result.converged,
        calibration_history={
            "max_abs_error_db": result.history_max_db,
            "mean_abs_error_db": result.history_mean_db,
        },
    )


def shape_for_model(model_weights, comb=None, shaper=None, calibration_seed=None):
    """Full shaping pipeline: flatten, weight, optionally calibrate."""
    comb = comb if comb is not None else CombSpec(n_lines=len(model_weights))
    shaper = shaper if shaper is not None else ShaperConfig()
    flat = flatten_comb(comb, shaper)
    shaped = shape_weights(comb, flat, model_weights, shaper)
    if calibration_seed is not None:
        shaped = apply_calibration(shaped, shaper, seed=calibration_seed)
    return shaped
