"""Reference forward execution for small GNNs on graphs and on HAGs.

Three model kinds cover the aggregation disciplines that matter:

  gcn        sum aggregation, update sigma(W . (a + h) / (deg + 1))
  sage-pool  element-wise max over sigma(W1 . h_u), update on (a, h)
  seq        order-sensitive recurrent fold
             state starts at the first element, then
             state = tanh(Wa . state + Wh . h_u + b); update on (a, h)

The HAG path evaluates aggregation nodes once in dependency order and
lets consumers reuse the stored partials; on an equivalent pair of
graphs it must reproduce the direct path (exactly for rationals, max,
and folds; to rounding for float sums).  Exact mode runs GCN on
Fraction scalars so multi-layer results compare bit-for-bit.

Forward passes are pure functions of (graph, model, features); results
carry per-layer activations plus counters for binary aggregations and
activation-vector transfers, which must agree with the static cost
model.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .graphs import Hag, InputGraph, agg_topo_order, consumer_cover_sizes

GCN = "gcn"
SAGE_POOL = "sage-pool"
SEQ = "seq"
MODEL_KINDS = (GCN, SAGE_POOL, SEQ)

IDENTITY = "identity"
RELU = "relu"
TANH = "tanh"


def _apply_activation(name: str, x):
    if name == IDENTITY:
        return x
    if name == RELU:
        return np.maximum(x, 0)
    if name == TANH:
        return np.tanh(x)
    raise ValueError(f"unknown activation {name!r}")


@dataclass
class GnnModel:
    """Model weights plus the aggregation/update recipe to run them with."""

    kind: str
    num_layers: int
    dim: int
    activation: str
    exact: bool
    layers: list[dict[str, np.ndarray]]


def _exact_matrix(rng, rows: int, cols: int) -> np.ndarray:
    values = rng.integers(-2, 3, size=(rows, cols))
    out = np.empty((rows, cols), dtype=object)
    for i in range(rows):
        for j in range(cols):
            out[i, j] = Fraction(int(values[i, j]))
    return out


def make_model(
    kind: str,
    num_layers: int,
    dim: int,
    seed: int = 0,
    activation: str | None = None,
    exact: bool = False,
) -> GnnModel:
    """Deterministically seeded model; float weights are uniform [-0.5, 0.5].

    Exact mode draws small integer weights as rationals and only supports
    the gcn kind (the recurrent fold needs tanh).
    """
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    if num_layers < 1:
        raise ValueError("num_layers must be at least 1")
    if dim < 1:
        raise ValueError("dim must be at least 1")
    if activation is None:
        activation = TANH if kind == SEQ else RELU
    if exact:
        if kind != GCN:
            raise ValueError("exact mode only supports the gcn kind")
        if activation == TANH:
            raise ValueError("exact mode cannot evaluate tanh")
    rng = np.random.default_rng(seed)

    def mat(rows, cols):
        if exact:
            return _exact_matrix(rng, rows, cols)
        return rng.uniform(-0.5, 0.5, size=(rows, cols))

    layers = []
    for _ in range(num_layers):
        if kind == GCN:
            layers.append({"w": mat(dim, dim)})
        elif kind == SAGE_POOL:
            layers.append({"w1": mat(dim, dim), "w2": mat(dim, 2 * dim)})
        else:
            layers.append(
                {
                    "wa": mat(dim, dim),
                    "wh": mat(dim, dim),
                    "b": mat(1, dim)[0],
                    "w": mat(dim, 2 * dim),
                }
            )
    return GnnModel(
        kind=kind, num_layers=num_layers, dim=dim, activation=activation, exact=exact, layers=layers
    )


def random_features(num_nodes: int, dim: int, seed: int, exact: bool = False) -> np.ndarray:
    """Seeded feature matrix; exact mode yields small integer rationals."""
    rng = np.random.default_rng(seed)
    if exact:
        return _exact_matrix(rng, num_nodes, dim)
    return rng.uniform(-1.0, 1.0, size=(num_nodes, dim))


def features_from_csv(text: str, exact: bool = False) -> np.ndarray:
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        cells = [c.strip() for c in line.split(",")]
        if exact:
            rows.append([Fraction(c) for c in cells])
        else:
            rows.append([float(c) for c in cells])
    if not rows:
        return np.zeros((0, 1))
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError("ragged feature CSV")
    if exact:
        out = np.empty((len(rows), width), dtype=object)
        for i, r in enumerate(rows):
            for j, x in enumerate(r):
                out[i, j] = x
        return out
    return np.array(rows, dtype=np.float64)


def features_to_csv(x: np.ndarray) -> str:
    lines = [",".join(str(v) if isinstance(v, Fraction) else repr(float(v)) for v in row) for row in x]
    return "\n".join(lines) + ("\n" if lines else "")


@dataclass(frozen=True)
class LayerCounters:
    binary_aggregations: int
    activation_reads: int


class AggBuffer:
    """Scratch rows for partial aggregation values, one per node.

    Allocated once per forward pass and reused by every layer; contents
    are meaningless between layers.
    """

    def __init__(self, num_rows: int, dim: int, exact: bool):
        self.values = np.empty((num_rows, dim), dtype=object if exact else np.float64)

    @property
    def num_scalars(self) -> int:
        return self.values.shape[0] * self.values.shape[1]


@dataclass
class ForwardResult:
    """Per-layer aggregates a and outputs h, with instrumentation."""

    layer_aggregates: list[np.ndarray]
    layer_outputs: list[np.ndarray]
    counters: list[LayerCounters]
    scratch_scalars: int

    @property
    def final_outputs(self) -> np.ndarray:
        return self.layer_outputs[-1]


def count_runtime_ops(result: ForwardResult) -> dict[str, int]:
    """Total dynamic operation counts over all layers of an executed pass."""
    return {
        "binary_aggregations": sum(c.binary_aggregations for c in result.counters),
        "activation_reads": sum(c.activation_reads for c in result.counters),
    }


def _zeros_row(dim: int, exact: bool):
    if exact:
        row = np.empty(dim, dtype=object)
        row[:] = Fraction(0)
        return row
    return np.zeros(dim)


def _neg_inf_row(dim: int):
    return np.full(dim, -np.inf)


def _check_shapes(num_nodes: int, model: GnnModel, x: np.ndarray) -> None:
    if x.ndim != 2:
        raise ValueError("features must be a 2-D matrix")
    if x.shape[0] != num_nodes:
        raise ValueError(f"feature matrix has {x.shape[0]} rows for {num_nodes} nodes")
    if x.shape[1] != model.dim:
        raise ValueError(f"feature dim {x.shape[1]} does not match model dim {model.dim}")


class _LayerOps:
    """One layer's aggregate/update pipeline shared by both executors."""

    def __init__(self, model: GnnModel, weights: dict[str, np.ndarray]):
        self.model = model
        self.weights = weights

    def source_value(self, h_prev: np.ndarray) -> np.ndarray:
        # What an input node contributes when somebody aggregates it.
        if self.model.kind == SAGE_POOL:
            return _apply_activation(self.model.activation, h_prev @ self.weights["w1"].T)
        return h_prev

    def combine(self, acc, value):
        kind = self.model.kind
        if kind == GCN:
            return acc + value
        if kind == SAGE_POOL:
            return np.maximum(acc, value)
        w = self.weights
        return np.tanh(acc @ w["wa"].T + value @ w["wh"].T + w["b"])

    def empty_value(self, dim: int, exact: bool):
        if self.model.kind == SAGE_POOL:
            return _neg_inf_row(dim)
        return _zeros_row(dim, exact)

    def fold(self, rows: np.ndarray, lst) -> tuple[np.ndarray, int]:
        """Aggregate rows[u] for u in lst; returns (value, binary op count)."""
        if not lst:
            return self.empty_value(rows.shape[1], self.model.exact), 0
        acc = rows[lst[0]]
        for u in lst[1:]:
            acc = self.combine(acc, rows[u])
        return acc, len(lst) - 1

    def update(self, a: np.ndarray, h_prev: np.ndarray, degrees) -> np.ndarray:
        kind = self.model.kind
        w = self.weights
        if kind == GCN:
            denom = np.asarray(degrees).reshape(-1, 1) + 1
            if self.model.exact:
                mixed = (a + h_prev) / denom
                return _apply_activation(self.model.activation, mixed.dot(w["w"].T))
            return _apply_activation(self.model.activation, ((a + h_prev) / denom) @ w["w"].T)
        key = "w2" if kind == SAGE_POOL else "w"
        stacked = np.concatenate([a, h_prev], axis=1)
        return _apply_activation(self.model.activation, stacked @ w[key].T)


def forward_gnn_graph(g: InputGraph, model: GnnModel, x: np.ndarray) -> ForwardResult:
    """Run the model directly on the input graph: every node re-aggregates
    its full neighbor list each layer."""
    _check_shapes(g.num_nodes, model, x)
    n, dim = g.num_nodes, model.dim
    degrees = [len(lst) for lst in g.in_neighbors]
    h = x
    aggregates, outputs, counters = [], [], []
    for weights in model.layers:
        ops = _LayerOps(model, weights)
        sources = ops.source_value(h)
        a = np.empty_like(x)
        bin_ops = 0
        for v in range(n):
            a[v], ops_v = ops.fold(sources, g.in_neighbors[v])
            bin_ops += ops_v
        h = ops.update(a, h, degrees) if n else h
        aggregates.append(a)
        outputs.append(h)
        counters.append(LayerCounters(bin_ops, g.num_edges))
    return ForwardResult(aggregates, outputs, counters, scratch_scalars=n * dim)


def forward_hag(hag: Hag, model: GnnModel, x: np.ndarray) -> ForwardResult:
    """Run the model on a HAG: aggregation nodes are computed once per
    layer and their partial results are shared by all consumers."""
    _check_shapes(hag.num_input_nodes, model, x)
    n, dim = hag.num_input_nodes, model.dim
    topo = agg_topo_order(hag)
    degrees = consumer_cover_sizes(hag)
    buffer = AggBuffer(hag.num_nodes, dim, model.exact)
    partials = buffer.values
    h = x
    aggregates, outputs, counters = [], [], []
    for weights in model.layers:
        ops = _LayerOps(model, weights)
        partials[:n] = ops.source_value(h)
        bin_ops = 0
        reads = 0
        for w in topo:
            lst = hag.agg_nodes[w - n]
            partials[w], ops_w = ops.fold(partials, lst)
            bin_ops += ops_w
            reads += sum(1 for u in lst if u < n)
        a = np.empty_like(x)
        for v in range(n):
            lst = hag.input_in_neighbors[v]
            a[v], ops_v = ops.fold(partials, lst)
            bin_ops += ops_v
            reads += len(lst)
        h = ops.update(a, h, degrees) if n else h
        aggregates.append(a)
        outputs.append(h)
        counters.append(LayerCounters(bin_ops, reads))
    return ForwardResult(aggregates, outputs, counters, scratch_scalars=buffer.num_scalars)
