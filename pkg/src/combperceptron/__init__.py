"""Microcomb broadcast-and-delay perceptron: simulator and capacity planner."""

from .datasets import (
    DatasetSplit,
    RawImage,
    Sample,
    downsample_7x7,
    flatten_column_major,
    image_to_features,
    load_mnist,
    load_wdbc,
    split,
    unflatten_column_major,
)
from .inference import PhotonicPerceptron
from .perceptron import (
    PerceptronClassifier,
    evaluate,
    evaluate_model,
    load_model,
    save_model,
    sigmoid,
)
from .photonics import (
    CombSpec,
    ShapedComb,
    ShaperConfig,
    apply_calibration,
    calibrate,
    effective_weight_bits,
    flatten_comb,
    sech2_profile,
    shape_for_model,
    shape_weights,
)
from .planner import (
    LayerSpec,
    NetworkPlan,
    comparison_table,
    layer_throughput,
    network_latency,
    network_throughput,
    perceptron_throughput,
    rough_potential,
    wavelengths_required,
)
from .signalchain import (
    ElectricalWaveform,
    FiberSpec,
    ImpairmentConfig,
    PhotonicPrediction,
    WaveformSpec,
    broadcast_modulate,
    channel_delay_s,
    channel_delays_s,
    encode_waveform,
    photodetect,
    run_perceptron,
    sample_and_recover,
    snr_required_for_bits,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
