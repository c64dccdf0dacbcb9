"""Exact arithmetic capacity planner for delay-and-sum photonic layers.

Every number here is closed-form: a neuron over N inputs produces one dot
product (N MACs, 2N OPS) per frame.  Two frame conventions exist because
reported figures use both: frame_2N charges 2N symbol durations per dot
product, frame_2N_minus_1 charges the 2N-1 slots of the sliding
correlation.  Functions return SI units (ops/s, seconds); formatting to
"GOPS" strings happens at the reporting edge.
"""

from dataclasses import dataclass, field

from .errors import PlanError

CONVENTIONS = ("frame_2N", "frame_2N_minus_1")

DEFAULT_SYMBOL_DURATION_S = 84e-12
DEFAULT_BIT_DEPTH = 8
DEFAULT_BUFFER_LATENCY_S = 200e-12


def _frame_symbols(n, convention):
    if convention == "frame_2N":
        return 2 * n
    if convention == "frame_2N_minus_1":
        return 2 * n - 1
    raise PlanError(f"convention must be one of {CONVENTIONS}, got {convention!r}")


@dataclass
class PerceptronThroughput:
    n: int
    symbol_duration_s: float
    bit_depth: int
    convention: str
    frame_duration_s: float
    macs_per_s: float
    ops_per_s: float
    bits_per_s: float

    def to_dict(self):
        return self.__dict__.copy()


def perceptron_throughput(n, symbol_duration_s=DEFAULT_SYMBOL_DURATION_S,
                          bit_depth=DEFAULT_BIT_DEPTH, convention="frame_2N"):
    """Throughput of one neuron: N MACs (2N OPS) per frame.

    At N = 49, 84 ps symbols and 8 bits, frame_2N gives 5.95 GMACs/s,
    11.9 GOPS and 95.2 Gbit/s; frame_2N_minus_1 gives 12.0275 GOPS.
    """
    if n < 1:
        raise PlanError(f"n must be >= 1, got {n}")
    if not symbol_duration_s > 0:
        raise PlanError(f"symbol_duration_s must be positive, got {symbol_duration_s}")
    frame = _frame_symbols(n, convention) * symbol_duration_s
    macs = n / frame
    ops = 2 * n / frame
    return PerceptronThroughput(
        n=n,
        symbol_duration_s=symbol_duration_s,
        bit_depth=bit_depth,
        convention=convention,
        frame_duration_s=frame,
        macs_per_s=macs,
        ops_per_s=ops,
        bits_per_s=ops * bit_depth,
    )


@dataclass
class LayerSpec:
    input_dim: int
    n_neurons: int

    def __post_init__(self):
        if self.input_dim < 1 or self.n_neurons < 1:
            raise PlanError(
                f"layer dimensions must be >= 1, got "
                f"{self.input_dim}x{self.n_neurons}"
            )


@dataclass
class NetworkPlan:
    layers: list
    symbol_duration_s: float = DEFAULT_SYMBOL_DURATION_S
    bit_depth: int = DEFAULT_BIT_DEPTH
    buffer_latency_s: float = DEFAULT_BUFFER_LATENCY_S
    buffer_count: int = 1
    convention: str = "frame_2N_minus_1"


def wavelengths_required(input_dim, n_neurons):
    """Comb lines to run a layer fully parallel: one per input per neuron."""
    if input_dim < 1 or n_neurons < 1:
        raise PlanError("layer dimensions must be >= 1")
    return input_dim * n_neurons


def layer_throughput(layer, symbol_duration_s=DEFAULT_SYMBOL_DURATION_S):
    """Per-layer numbers: each neuron needs (2*input_dim - 1) symbol slots.

    A 49-input, 7-neuron layer at 84 ps: 8.148 ns per frame, 12.0275 GOPS
    per neuron, 84.19 GOPS for the layer, 343 wavelengths.
    """
    duration = (2 * layer.input_dim - 1) * symbol_duration_s
    per_neuron = 2 * layer.input_dim / duration
    return {
        "input_dim": layer.input_dim,
        "n_neurons": layer.n_neurons,
        "frame_duration_s": duration,
        "per_neuron_ops_s": per_neuron,
        "total_ops_s": per_neuron * layer.n_neurons,
        "wavelengths": wavelengths_required(layer.input_dim, layer.n_neurons),
    }


@dataclass
class ThroughputReport:
    per_layer: list
    network_total_ops_s: float
    network_bits_s: float
    latency_s: float
    convention: str
    bit_depth: int
    extras: dict = field(default_factory=dict)

    def to_dict(self):
        doc = {
            "convention": self.convention,
            "bit_depth": self.bit_depth,
            "per_layer": self.per_layer,
            "network_total_ops_s": self.network_total_ops_s,
            "network_bits_s": self.network_bits_s,
            "latency_s": self.latency_s,
        }
        doc.update(self.extras)
        return doc


def _check_chaining(layers):
    if not layers:
        raise PlanError("plan has no layers")
    for i in range(len(layers) - 1):
        if layers[i].n_neurons != layers[i + 1].input_dim:
            raise PlanError(
                f"layer {i} feeds {layers[i].n_neurons} outputs into layer "
                f"{i + 1}, which expects {layers[i + 1].input_dim} inputs"
            )


def network_throughput(plan):
    """Sum of layer throughputs for a chained feed-forward plan."""
    if plan.convention not in CONVENTIONS:
        raise PlanError(
            f"convention must be one of {CONVENTIONS}, got {plan.convention!r}"
        )
    _check_chaining(plan.layers)
    per_layer = [layer_throughput(l, plan.symbol_duration_s) for l in plan.layers]
    total_ops = sum(entry["total_ops_s"] for entry in per_layer)
    return ThroughputReport(
        per_layer=per_layer,
        network_total_ops_s=total_ops,
        network_bits_s=total_ops * plan.bit_depth,
        latency_s=network_latency(plan),
        convention=plan.convention,
        bit_depth=plan.bit_depth,
    )


def network_latency(plan):
    """Buffering plus twice each layer's frame duration.

    Each layer pays its frame once to fill and once to drain; with one
    200 ps buffer, the 49x7 -> 7x10 plan lands at 18.68 ns.  An empty
    layer list prices the buffers alone.
    """
    total = plan.buffer_count * plan.buffer_latency_s
    for layer in plan.layers:
        total += 2 * (2 * layer.input_dim - 1) * plan.symbol_duration_s
    return total


def rough_potential(n_layers, neurons_per_layer, baud_rate_hz, bit_depth=None):
    """Headline scaling estimate: layers x neurons x baud.

    20 layers of 20 neurons at 25 GBaud come to 10 TFLOPS, 80 Tbit/s at
    8 bits.  Returns (ops_per_s, bits_per_s); bits_per_s is None when no
    bit depth is given.
    """
    if n_layers < 1 or neurons_per_layer < 1:
        raise PlanError("rough_potential needs at least one layer and neuron")
    ops = n_layers * neurons_per_layer * baud_rate_hz
    bits = ops * bit_depth if bit_depth is not None else None
    return ops, bits


# Published figures for other optical neural-network systems, kept verbatim
# (strings carry the <, > and unit qualifiers; None marks an absent entry).
COMPARISON_COLUMNS = (
    "approach",
    "source",
    "digital_compatible",
    "latency",
    "throughput_ops",
    "throughput_bits_s",
)

_COMPARISON_ROWS = (
    ("Diffraction devices", "[17]", None, "< 10 ns", None, None),
    ("Integrated couplers", "[3]", None, "< 0.1 ns", None, None),
    ("Reservoir computing", "[20]", "Yes", "< 1 μs", "17.6 G", None),
    ("Spike computing", "[23]", "Yes", "< 1 μs", "8 G", "8 G"),
    ("Spike computing", "[24]", None, "< 0.1 μs", None, None),
    ("Single Perceptron", "[11]", "Yes", "64 μs", "11.9 G", "95.2 G"),
    ("Deep ONN", "[12]", "Yes", ">18.68 ns", ">10 T", ">80 T"),
)

ABSENT_MARKER = "—"


def comparison_table():
    """Rows of the published-system comparison as a list of dicts."""
    return [dict(zip(COMPARISON_COLUMNS, row)) for row in _COMPARISON_ROWS]


def comparison_table_csv():
    """CSV rendering with the absent marker spelled out."""
    lines = [",".join(COMPARISON_COLUMNS)]
    for row in _COMPARISON_ROWS:
        lines.append(
            ",".join(ABSENT_MARKER if v is None else str(v) for v in row)
        )
    return "\n".join(lines) + "\n"


def plan_from_dict(doc):
    """Build a NetworkPlan from its JSON form (durations given in ps)."""
    try:
        layers = [
            LayerSpec(input_dim=int(l["input_dim"]), n_neurons=int(l["n_neurons"]))
            for l in doc["layers"]
        ]
    except (KeyError, TypeError) as exc:
        raise PlanError(f"malformed plan layers: {exc}") from None
    return NetworkPlan(
        layers=layers,
        symbol_duration_s=float(doc.get("tau_ps", 84.0)) * 1e-12,
        bit_depth=int(doc.get("bit_depth", DEFAULT_BIT_DEPTH)),
        buffer_latency_s=float(doc.get("buffer_latency_ps", 200.0)) * 1e-12,
        buffer_count=int(doc.get("buffer_count", 1)),
        convention=str(doc.get("convention", "frame_2N_minus_1")),
    )
