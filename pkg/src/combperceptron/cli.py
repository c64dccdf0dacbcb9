"""Command-line interface.

Subcommands: train, simulate, sweep, plan, export-trace, table1.  Runs are
driven by one JSON config document; --set key.path=value overrides single
leaves.  Exit codes: 0 success, 2 usage problem, 3 data problem, 4 numeric
problem.  Errors print one machine-parseable line to stderr.
"""

import argparse
import copy
import json
import math
import os
import sys
import time

import numpy as np

from . import jsonio
from .datasets import Sample, image_to_features, load_mnist, load_wdbc, split
from .errors import (
    CombPerceptronError,
    DataError,
    NumericError,
    UsageError,
)
from .inference import PhotonicPerceptron
from .perceptron import (
    PerceptronClassifier,
    evaluate,
    load_model,
    save_model,
)
from .photonics import CombSpec, ShaperConfig
from .planner import (
    comparison_table,
    comparison_table_csv,
    network_throughput,
    plan_from_dict,
)
from .signalchain import (
    FiberSpec,
    ImpairmentConfig,
    WaveformSpec,
    broadcast_modulate,
    channel_delays_s,
    delayed_channels_on_grid,
    encode_waveform,
    photodetect,
    reference_response,
    sample_and_recover,
)

OUTPUT_DIR_ENV = "COMBPERCEPTRON_OUTPUT_DIR"

DEFAULT_CONFIG = {
    "task": "digits",
    "paths": {},
    "digits": [0, 6],
    "max_per_digit": 500,
    "split": {"n_train": 920, "n_test": 80, "seed": 7},
    "train": {
        "learning_rate": 0.5,
        "epochs": 2000,
        "seed": 0,
        "weight_mode": "nonnegative",
        "init_scale": 0.01,
    },
    "photonics": {
        "comb": {
            "n_lines": None,  # None: match the feature count
            "fsr_hz": 48.9e9,
            "center_wavelength_m": 1550e-9,
        },
        "shaper": {
            "attenuation_range_db": 35.0,
            "measurement_noise_sigma_db": 0.05,
            "loss_error_sigma_db": 0.2,
            "tolerance_db": 0.1,
            "max_iterations": 8,
        },
        "calibration_seed": 0,
    },
    "chain": {
        "waveform": {
            "sample_rate_hz": 59.421642e9,
            "samples_per_symbol": 5,
            "awg_bits": 8,
            "analog_bandwidth_hz": 25e9,
        },
        "fiber": {
            "length_km": 13.0,
            "dispersion_ps_per_nm_km": 17.0,
            "delay_mode": "nominal_tau",
            "delay_jitter_ps_sigma": 0.0,
        },
        "impairments": {
            "electrical_snr_db": None,  # None: noiseless
            "awg_quantize": True,
            "bandwidth_filter": False,
            "seed": 0,
        },
    },
    "output_dir": None,
}


# -- config plumbing ----------------------------------------------------

def _merge(base, override):
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _apply_override(config, assignment):
    if "=" not in assignment:
        raise UsageError(f"--set expects key.path=value, got {assignment!r}")
    path, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = config
    keys = path.split(".")
    for key in keys[:-1]:
        if not isinstance(node.get(key), dict):
            raise UsageError(f"--set path {path!r} does not exist in the config")
        node = node[key]
    if keys[-1] not in node:
        raise UsageError(f"--set path {path!r} does not exist in the config")
    node[keys[-1]] = value


def load_config(args):
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            user = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {args.config} is not valid JSON: {exc}") from None
    config = _merge(DEFAULT_CONFIG, user)
    for assignment in args.set or []:
        _apply_override(config, assignment)
    if config.get("output_dir") is None:
        config["output_dir"] = os.environ.get(OUTPUT_DIR_ENV, "runs")
    return config


def _outdir(config):
    path = config["output_dir"]
    os.makedirs(path, exist_ok=True)
    return path


# -- config -> objects ---------------------------------------------------

def waveform_from(config):
    return WaveformSpec(**config["chain"]["waveform"])


def fiber_from(config):
    return FiberSpec(**config["chain"]["fiber"])


def impairments_from(config):
    imp = dict(config["chain"]["impairments"])
    snr = imp.pop("electrical_snr_db")
    return ImpairmentConfig(
        electrical_snr_db=math.inf if snr is None else float(snr), **imp
    )


def shaper_from(config):
    shp = dict(config["photonics"]["shaper"])
    rng_db = shp.pop("attenuation_range_db")
    return ShaperConfig(
        attenuation_range_db=math.inf if rng_db is None else float(rng_db), **shp
    )


def comb_from(config, n_features):
    comb = dict(config["photonics"]["comb"])
    if comb.get("n_lines") is None:
        comb["n_lines"] = n_features
    return CombSpec(**comb)


def load_task(config):
    """Load and split the configured task; returns train/test arrays."""
    task = config["task"]
    paths = config["paths"]
    if task == "digits":
        for key in ("images", "labels"):
            if key not in paths:
                raise UsageError(f"task 'digits' needs paths.{key} in the config")
        digits = sorted(int(d) for d in config["digits"])
        if len(digits) != 2:
            raise UsageError(f"digits must list exactly two digits, got {digits}")
        images = load_mnist(paths["images"], paths["labels"], digits,
                            max_per_digit=config["max_per_digit"])
        # the larger digit is class 1
        samples = [
            Sample(image_to_features(im), 1 if im.label == digits[1] else 0)
            for im in images
        ]
    elif task == "cancer":
        if "csv" not in paths:
            raise UsageError("task 'cancer' needs paths.csv in the config")
        samples = load_wdbc(paths["csv"])
    else:
        raise UsageError(f"unknown task {task!r} (expected 'digits' or 'cancer')")

    cut = split(samples, config["split"]["n_train"], config["split"]["n_test"],
                config["split"]["seed"])
    Xtr, ytr = cut.arrays("train")
    Xte, yte = cut.arrays("test")
    return Xtr, ytr, Xte, yte


def build_photonic(config, model):
    return PhotonicPerceptron.from_model(
        model,
        comb=comb_from(config, model.n_features_in_),
        shaper=shaper_from(config),
        waveform=waveform_from(config),
        fiber=fiber_from(config),
        impairments=impairments_from(config),
        calibration_seed=config["photonics"]["calibration_seed"],
    )


def _model_path(config, args):
    if getattr(args, "model", None):
        return args.model
    return os.path.join(config["output_dir"], "model.json")


def _load_model_or_fail(path):
    if not os.path.exists(path):
        raise DataError(f"model file {path} does not exist; run train first "
                        "or pass --model")
    return load_model(path)


# -- subcommands ---------------------------------------------------------

def cmd_train(args):
    config = load_config(args)
    out = _outdir(config)
    t0 = time.perf_counter()
    Xtr, ytr, Xte, yte = load_task(config)
    t_load = time.perf_counter() - t0

    t0 = time.perf_counter()
    model = PerceptronClassifier(**config["train"]).fit(Xtr, ytr)
    t_train = time.perf_counter() - t0

    train_eval = evaluate(model.predict(Xtr), ytr)
    test_eval = evaluate(model.predict(Xte), yte)

    model_path = os.path.join(out, "model.json")
    save_model(model, model_path, train_meta={"task": config["task"]})
    report = {
        "task": config["task"],
        "model_file": model_path,
        "train": train_eval.to_dict(),
        "test": test_eval.to_dict(),
        "config_echo": config,
        "timing": {"load_s": t_load, "train_s": t_train},
    }
    jsonio.dump(report, os.path.join(out, "train_report.json"))
    print(f"train accuracy {train_eval.accuracy:.4f} | "
          f"test accuracy {test_eval.accuracy:.4f}")
    print(f"wrote {model_path}")
    print(f"wrote {os.path.join(out, 'train_report.json')}")
    return 0


def cmd_simulate(args):
    config = load_config(args)
    out = _outdir(config)
    Xtr, ytr, Xte, yte = load_task(config)
    model = _load_model_or_fail(_model_path(config, args))

    t0 = time.perf_counter()
    photonic = build_photonic(config, model)
    predictions = photonic.simulate(Xte)
    t_sim = time.perf_counter() - t0

    digital_classes = model.predict(Xte)
    photonic_classes = np.array([p.predicted_class for p in predictions])
    digital_eval = evaluate(digital_classes, yte)
    photonic_eval = evaluate(photonic_classes, yte)
    agreement = float(np.mean(digital_classes == photonic_classes))

    lines_path = os.path.join(out, "predictions.jsonl")
    with open(lines_path, "w", encoding="utf-8") as fh:
        for i, pred in enumerate(predictions):
            fh.write(json.dumps({
                "index": i,
                "dot_estimate": pred.dot_product_estimate,
                "score": pred.score,
                "class": pred.predicted_class,
                "label": int(yte[i]),
            }) + "\n")

    report = {
        "task": config["task"],
        "n_test": int(len(yte)),
        "digital_accuracy": digital_eval.accuracy,
        "photonic_accuracy": photonic_eval.accuracy,
        "agreement": agreement,
        "digital_confusion": digital_eval.confusion.tolist(),
        "photonic_confusion": photonic_eval.confusion.tolist(),
        "calibration": {
            "iterations": photonic.shaped_.calibration_iterations,
            "converged": photonic.shaped_.calibration_converged,
        },
        "config_echo": config,
        "timing": {"simulate_s": t_sim},
    }
    jsonio.dump(report, os.path.join(out, "report.json"))
    print(f"digital accuracy {digital_eval.accuracy:.4f} | "
          f"photonic accuracy {photonic_eval.accuracy:.4f} | "
          f"agreement {agreement:.4f}")
    print(f"wrote {lines_path}")
    print(f"wrote {os.path.join(out, 'report.json')}")
    return 0


SWEEP_AXES = ("snr_db", "awg_bits", "shaper_range_db")


def _sweep_config(config, axis, value):
    varied = copy.deepcopy(config)
    if axis == "snr_db":
        varied["chain"]["impairments"]["electrical_snr_db"] = value
    elif axis == "awg_bits":
        varied["chain"]["waveform"]["awg_bits"] = int(value)
    elif axis == "shaper_range_db":
        varied["photonics"]["shaper"]["attenuation_range_db"] = value
    return varied


def cmd_sweep(args):
    config = load_config(args)
    out = _outdir(config)
    if args.axis not in SWEEP_AXES:
        raise UsageError(f"--axis must be one of {SWEEP_AXES}, got {args.axis!r}")
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"--values must be comma-separated numbers: {exc}") from None
    if not values:
        raise UsageError("--values is empty")
    if args.seeds < 1:
        raise UsageError(f"--seeds must be >= 1, got {args.seeds}")

    Xtr, ytr, Xte, yte = load_task(config)
    model = _load_model_or_fail(_model_path(config, args))

    base_seed = config["chain"]["impairments"]["seed"]
    rows = []
    for value in values:
        accs = []
        for offset in range(args.seeds):
            varied = _sweep_config(config, args.axis, value)
            varied["chain"]["impairments"]["seed"] = base_seed + offset
            varied["photonics"]["calibration_seed"] = (
                config["photonics"]["calibration_seed"] + offset
            )
            photonic = build_photonic(varied, model)
            accs.append(evaluate(photonic.predict(Xte), yte).accuracy)
        rows.append((value, float(np.mean(accs)), float(np.std(accs))))

    csv_path = os.path.join(out, f"sweep_{args.axis}.csv")
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("value,mean_accuracy,std\n")
        for value, mean, std in rows:
            fh.write(f"{value!r},{mean!r},{std!r}\n")
    jsonio.dump(
        {
            "axis": args.axis,
            "seeds": args.seeds,
            "rows": [list(r) for r in rows],
            "config_echo": config,
        },
        os.path.join(out, f"sweep_{args.axis}.json"),
    )
    for value, mean, std in rows:
        print(f"{args.axis}={value:g}: mean accuracy {mean:.4f} (std {std:.4f})")
    print(f"wrote {csv_path}")
    return 0


def cmd_plan(args):
    try:
        with open(args.plan_file, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read plan {args.plan_file}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"plan {args.plan_file} is not valid JSON: {exc}") from None

    plan = plan_from_dict(doc)
    report = network_throughput(plan).to_dict()
    if "fiber_length_km" in doc:
        fiber = FiberSpec(length_km=float(doc["fiber_length_km"]))
        report["fiber_time_of_flight_s"] = fiber.time_of_flight_s()
    text = jsonio.dumps(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_export_trace(args):
    config = load_config(args)
    out = _outdir(config)
    Xtr, ytr, Xte, yte = load_task(config)
    if not 0 <= args.sample_index < len(yte):
        raise UsageError(
            f"--sample-index {args.sample_index} outside the test set "
            f"(0..{len(yte) - 1})"
        )
    model = _load_model_or_fail(_model_path(config, args))
    photonic = build_photonic(config, model)
    shaped = photonic.shaped_
    spec = waveform_from(config)
    fiber = fiber_from(config)
    imp = impairments_from(config)

    x = Xte[args.sample_index]
    rng = np.random.default_rng(imp.seed ^ args.sample_index)
    delays = channel_delays_s(shaped.n_lines, spec, fiber, shaped, rng=rng)
    encoded = encode_waveform(x, model.bias_, spec, imp)
    channels = broadcast_modulate(encoded, shaped)
    detected = photodetect(channels, delays, spec, imp, rng=rng,
                           frame=encoded.frame)
    reference = reference_response(shaped, spec, fiber, imp, delays, rng=rng)
    recovered = sample_and_recover(detected, shaped, spec, reference)

    def write_csv(path, samples):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("time_s,value\n")
            for i, v in enumerate(samples):
                fh.write(f"{i / spec.sample_rate_hz!r},{float(v)!r}\n")

    write_csv(os.path.join(out, "trace_encoded.csv"), encoded.samples)
    write_csv(os.path.join(out, "trace_detected.csv"), detected.samples)
    written = ["trace_encoded.csv", "trace_detected.csv"]
    if args.per_channel:
        grid = delayed_channels_on_grid(channels, delays, spec)
        for k in range(grid.shape[0]):
            name = f"trace_channel_{k + 1:02d}.csv"
            write_csv(os.path.join(out, name), grid[k])
            written.append(name)

    jsonio.dump(
        {
            "sample_index": args.sample_index,
            "label": int(yte[args.sample_index]),
            "center_value": recovered.center_value,
            "reference_value": recovered.reference_value,
            "weight_sum": shaped.weight_sum(),
            "dot_estimate": recovered.dot_product_estimate,
            "score": recovered.score,
            "class": recovered.predicted_class,
        },
        os.path.join(out, "trace_recovery.json"),
    )
    written.append("trace_recovery.json")
    for name in written:
        print(f"wrote {os.path.join(out, name)}")
    return 0


def cmd_table1(args):
    if args.format == "csv":
        text = comparison_table_csv()
    else:
        text = jsonio.dumps(comparison_table())
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


# -- entry point ----------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="combperceptron",
        description="Simulate a microcomb broadcast-and-delay perceptron "
                    "and plan its throughput.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_args(p, needs_model=False):
        p.add_argument("--config", required=True, help="run config JSON")
        p.add_argument("--set", action="append", metavar="KEY.PATH=VALUE",
                       help="override one config leaf")
        if needs_model:
            p.add_argument("--model", default=None,
                           help="trained model JSON (default: <output_dir>/model.json)")

    p = sub.add_parser("train", help="train the digital perceptron")
    add_config_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("simulate", help="run the test split through the chain")
    add_config_args(p, needs_model=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="sweep one impairment axis")
    add_config_args(p, needs_model=True)
    p.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p.add_argument("--values", required=True,
                   help="comma-separated axis values")
    p.add_argument("--seeds", type=int, default=1,
                   help="number of noise seeds per value")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plan", help="throughput/latency report for a network plan")
    p.add_argument("--plan-file", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("export-trace", help="dump waveforms for one test sample")
    add_config_args(p, needs_model=True)
    p.add_argument("--sample-index", type=int, default=0)
    p.add_argument("--per-channel", action="store_true")
    p.set_defaults(func=cmd_export_trace)

    p = sub.add_parser("table1", help="published-system comparison table")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_table1)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return 2
    except (DataError, OSError) as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"error: numeric: {exc}", file=sys.stderr)
        return 4
    except CombPerceptronError as exc:
        print(f"error: internal: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
