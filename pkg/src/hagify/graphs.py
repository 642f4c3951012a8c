"""Graph data model: input graphs, HAGs, covers, and the equivalence check.

An InputGraph stores, for each node, the ordered list of in-neighbors it
aggregates.  A Hag (hierarchically aggregated graph) is the same graph
plus extra aggregation nodes that hold shared partial aggregation
results; input nodes then aggregate a mix of raw input nodes and
aggregation nodes.  Node ids are dense integers: 0..num_input_nodes-1 are
input nodes, everything at or above num_input_nodes is an aggregation
node.

Two aggregation disciplines are supported.  In "set" mode the aggregation
operator is associative and commutative, so an aggregation node stands
for an unordered group of inputs.  In "sequential" mode the operator is a
non-commutative fold and an aggregation node stands for a shared ordered
prefix of a neighbor list.

Both graph types are frozen dataclasses over tuples; reads are safe from
any number of threads.  The search module works on private mutable copies
and only materializes a Hag at the end.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

SET_MODE = "set"
SEQUENTIAL_MODE = "sequential"
MODES = (SET_MODE, SEQUENTIAL_MODE)


class GraphError(Exception):
    """Base class for graph loading and validation failures."""


class ParseError(GraphError):
    """Malformed edge-list or HAG text."""


class ValidationError(GraphError):
    """Input violates a data-model invariant (self-loop, duplicate edge, bad id)."""


class StructuralError(GraphError):
    """A HAG is structurally unusable: cyclic, orphaned, or blown-up covers."""


@dataclass(frozen=True)
class InputGraph:
    """Directed graph given by per-node ordered in-neighbor lists.

    `in_neighbors[v]` lists the nodes whose previous-layer values v
    aggregates.  Order is only meaningful in sequential mode but is
    preserved always.
    """

    num_nodes: int
    in_neighbors: tuple[tuple[int, ...], ...]

    @property
    def num_edges(self) -> int:
        return sum(len(lst) for lst in self.in_neighbors)

    def __repr__(self) -> str:
        return f"InputGraph(nodes={self.num_nodes}, edges={self.num_edges})"


def make_input_graph(in_neighbors, num_nodes: int | None = None) -> InputGraph:
    """Build and validate an InputGraph from per-node in-neighbor lists.

    Raises ValidationError on self-loops, duplicate in-neighbors, or ids
    out of range.
    """
    lists = tuple(tuple(lst) for lst in in_neighbors)
    n = len(lists) if num_nodes is None else num_nodes
    if len(lists) < n:
        lists = lists + ((),) * (n - len(lists))
    elif len(lists) > n:
        raise ValidationError(f"{len(lists)} neighbor lists for {n} nodes")
    for v, lst in enumerate(lists):
        seen = set()
        for u in lst:
            if not (0 <= u < n):
                raise ValidationError(f"node {v}: in-neighbor {u} out of range [0, {n})")
            if u == v:
                raise ValidationError(f"node {v}: self-loop")
            if u in seen:
                raise ValidationError(f"node {v}: duplicate in-neighbor {u}")
            seen.add(u)
    return InputGraph(num_nodes=n, in_neighbors=lists)


_NODES_DIRECTIVE = "nodes:"


def load_graph(text: str, *, undirected: bool = False) -> InputGraph:
    """Parse edge-list text into a validated InputGraph.

    Each non-comment line is "u v", meaning v aggregates u.  Lines starting
    with '#' are comments; the directive "# nodes: N" fixes the node count
    (otherwise it is 1 + the largest id seen).  With undirected=True every
    line also emits the reverse edge.  Neighbor order is first-appearance
    order in the file.
    """
    edges: list[tuple[int, int, int]] = []  # (u, v, line_no)
    declared: int | None = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip().lower()
            if body.startswith(_NODES_DIRECTIVE):
                try:
                    declared = int(body[len(_NODES_DIRECTIVE):].strip())
                except ValueError:
                    raise ParseError(f"line {line_no}: bad node-count directive: {raw!r}")
                if declared < 0:
                    raise ParseError(f"line {line_no}: negative node count")
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"line {line_no}: expected 'u v', got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"line {line_no}: non-integer node id in {raw!r}")
        if u < 0 or v < 0:
            raise ParseError(f"line {line_no}: negative node id in {raw!r}")
        edges.append((u, v, line_no))
        if undirected:
            edges.append((v, u, line_no))

    max_id = max((max(u, v) for u, v, _ in edges), default=-1)
    num_nodes = max_id + 1 if declared is None else declared
    if num_nodes < max_id + 1:
        raise ValidationError(f"node-count directive {num_nodes} below largest id {max_id}")

    lists: list[list[int]] = [[] for _ in range(num_nodes)]
    seen: set[tuple[int, int]] = set()
    for u, v, line_no in edges:
        if u == v:
            raise ValidationError(f"line {line_no}: self-loop {u}->{v}")
        if (u, v) in seen:
            raise ValidationError(f"line {line_no}: duplicate edge {u}->{v}")
        seen.add((u, v))
        lists[v].append(u)
    return InputGraph(num_nodes=num_nodes, in_neighbors=tuple(tuple(l) for l in lists))


@dataclass(frozen=True)
class Hag:
    """Input graph augmented with shared aggregation nodes.

    Aggregation node i has NodeId num_input_nodes + i and aggregates
    `agg_nodes[i]`.  Input node v aggregates `input_in_neighbors[v]`,
    whose entries may be input or aggregation ids.
    """

    num_input_nodes: int
    mode: str
    agg_nodes: tuple[tuple[int, ...], ...]
    input_in_neighbors: tuple[tuple[int, ...], ...]

    @property
    def num_agg_nodes(self) -> int:
        return len(self.agg_nodes)

    @property
    def num_nodes(self) -> int:
        return self.num_input_nodes + len(self.agg_nodes)

    @property
    def num_edges(self) -> int:
        return sum(len(lst) for lst in self.agg_nodes) + sum(
            len(lst) for lst in self.input_in_neighbors
        )

    def in_neighbors(self, v: int) -> tuple[int, ...]:
        if v < self.num_input_nodes:
            return self.input_in_neighbors[v]
        return self.agg_nodes[v - self.num_input_nodes]

    def is_agg(self, v: int) -> bool:
        return v >= self.num_input_nodes

    def __repr__(self) -> str:
        return (
            f"Hag(inputs={self.num_input_nodes}, agg={self.num_agg_nodes}, "
            f"edges={self.num_edges}, mode={self.mode})"
        )


def make_hag(num_input_nodes, mode, agg_nodes, input_in_neighbors) -> Hag:
    """Build a Hag and check ids, acyclicity, and aggregation-node usage."""
    if mode not in MODES:
        raise ValidationError(f"unknown mode {mode!r}")
    aggs = tuple(tuple(lst) for lst in agg_nodes)
    inputs = tuple(tuple(lst) for lst in input_in_neighbors)
    if len(inputs) != num_input_nodes:
        raise ValidationError(
            f"{len(inputs)} input neighbor lists for {num_input_nodes} input nodes"
        )
    total = num_input_nodes + len(aggs)
    for i, lst in enumerate(aggs):
        if len(lst) < 2:
            raise ValidationError(f"aggregation node {num_input_nodes + i} has fewer than 2 in-neighbors")
    for v, lst in enumerate(aggs + inputs):
        node = num_input_nodes + v if v < len(aggs) else v - len(aggs)
        seen = set()
        for u in lst:
            if not (0 <= u < total):
                raise ValidationError(f"node {node}: in-neighbor {u} out of range [0, {total})")
            if u == node:
                raise ValidationError(f"node {node}: self-loop")
            if u in seen:
                raise ValidationError(f"node {node}: duplicate in-neighbor {u}")
            seen.add(u)
    h = Hag(num_input_nodes=num_input_nodes, mode=mode, agg_nodes=aggs, input_in_neighbors=inputs)
    agg_topo_order(h)  # raises StructuralError on a cycle
    used = set()
    for lst in aggs + inputs:
        used.update(u for u in lst if u >= num_input_nodes)
    for i in range(len(aggs)):
        if num_input_nodes + i not in used:
            raise StructuralError(f"aggregation node {num_input_nodes + i} has no out-edge")
    return h


def trivial_hag(g: InputGraph, mode: str = SET_MODE) -> Hag:
    """The identity Hag: no aggregation nodes, lists copied from g."""
    if mode not in MODES:
        raise ValidationError(f"unknown mode {mode!r}")
    return Hag(
        num_input_nodes=g.num_nodes,
        mode=mode,
        agg_nodes=(),
        input_in_neighbors=g.in_neighbors,
    )


def agg_topo_order(h: Hag) -> list[int]:
    """Aggregation-node ids in dependency order (suppliers first).

    Only edges between aggregation nodes can form cycles: input nodes act
    as value sources when referenced and never feed back.  Raises
    StructuralError if the aggregation subgraph is cyclic.
    """
    n = h.num_input_nodes
    deps: dict[int, list[int]] = {}
    for i, lst in enumerate(h.agg_nodes):
        deps[n + i] = [u for u in lst if u >= n]
    order: list[int] = []
    state: dict[int, int] = {}  # 0 in progress, 1 done
    for start in deps:
        if start in state:
            continue
        stack = [(start, iter(deps[start]))]
        state[start] = 0
        while stack:
            node, it = stack[-1]
            advanced = False
            for u in it:
                s = state.get(u)
                if s == 0:
                    raise StructuralError(f"cycle through aggregation node {u}")
                if s is None:
                    state[u] = 0
                    stack.append((u, iter(deps[u])))
                    advanced = True
                    break
            if not advanced:
                state[node] = 1
                order.append(node)
                stack.pop()
    return order


def _supplier_covers(h: Hag, order: list[int] | None = None) -> dict[int, tuple[int, ...]]:
    """Cover of each aggregation node as a tuple of input ids.

    Sequential mode keeps fold order; set mode keeps a sorted multiset so
    duplicate inputs stay visible.  Input nodes are implicit singletons
    and are not materialized here.
    """
    n = h.num_input_nodes
    covers: dict[int, tuple[int, ...]] = {}
    seq = h.mode == SEQUENTIAL_MODE
    for w in order if order is not None else agg_topo_order(h):
        parts: list[int] = []
        for u in h.agg_nodes[w - n]:
            if u < n:
                parts.append(u)
            else:
                parts.extend(covers[u])
        if len(parts) > n:
            raise StructuralError(
                f"aggregation node {w} covers {len(parts)} entries for {n} inputs; "
                "inputs are duplicated"
            )
        covers[w] = tuple(parts) if seq else tuple(sorted(parts))
    return covers


def _consumer_cover(h: Hag, lst, covers) -> tuple[int, ...]:
    n = h.num_input_nodes
    parts: list[int] = []
    for u in lst:
        if u < n:
            parts.append(u)
        else:
            parts.extend(covers[u])
    if h.mode == SEQUENTIAL_MODE:
        return tuple(parts)
    return tuple(sorted(parts))


def cover(h: Hag, v: int):
    """Input nodes whose previous-layer values feed node v's aggregation.

    Returns a frozenset in set mode and an ordered tuple in sequential
    mode.  A node with no in-neighbors covers itself (it is a pure value
    source).  Raises StructuralError if the HAG is cyclic.
    """
    if not (0 <= v < h.num_nodes):
        raise ValidationError(f"node {v} out of range")
    covers = _supplier_covers(h)
    if v >= h.num_input_nodes:
        result = covers[v]
    else:
        lst = h.input_in_neighbors[v]
        result = _consumer_cover(h, lst, covers) if lst else (v,)
    return result if h.mode == SEQUENTIAL_MODE else frozenset(result)


@dataclass(frozen=True)
class EquivalenceResult:
    """Outcome of an equivalence check, with the first mismatch if any."""

    equivalent: bool
    node: int | None = None
    expected: tuple[int, ...] = ()
    actual: tuple[int, ...] = ()

    def __bool__(self) -> bool:
        return self.equivalent

    def describe(self) -> str:
        if self.equivalent:
            return "equivalent"
        return (
            f"mismatch at node {self.node}: aggregates {list(self.expected)} "
            f"in the input graph but covers {list(self.actual)} in the HAG"
        )


def check_equivalence(g: InputGraph, h: Hag, mode: str | None = None) -> EquivalenceResult:
    """Check that h computes exactly the aggregations of g.

    For every input node the HAG cover must equal the node's in-neighbor
    list: as a multiset in set mode, as an exact sequence in sequential
    mode.  Reports the first offending node on failure.
    """
    if mode is not None and mode != h.mode:
        raise ValidationError(f"requested mode {mode!r} but HAG is {h.mode!r}")
    if g.num_nodes != h.num_input_nodes:
        return EquivalenceResult(False, node=None, expected=(g.num_nodes,), actual=(h.num_input_nodes,))
    covers = _supplier_covers(h)
    seq = h.mode == SEQUENTIAL_MODE
    for v in range(g.num_nodes):
        want = g.in_neighbors[v] if seq else tuple(sorted(g.in_neighbors[v]))
        got = _consumer_cover(h, h.input_in_neighbors[v], covers)
        if want != got:
            return EquivalenceResult(False, node=v, expected=g.in_neighbors[v], actual=got)
    return EquivalenceResult(True)


def consumer_cover_sizes(h: Hag) -> list[int]:
    """Multiset cover size per input node (the node's original in-degree)."""
    n = h.num_input_nodes
    size: dict[int, int] = {}
    for w in agg_topo_order(h):
        size[w] = sum(1 if u < n else size[u] for u in h.agg_nodes[w - n])
    return [sum(1 if u < n else size[u] for u in lst) for lst in h.input_in_neighbors]


# ---- serialization -------------------------------------------------------

def serialize_hag(h: Hag) -> str:
    """Render a Hag as JSON with a fixed field order.

    Every aggregation node must be binary; that is all the search emits
    and all the on-disk format represents.
    """
    for i, lst in enumerate(h.agg_nodes):
        if len(lst) != 2:
            raise ValidationError(
                f"aggregation node {h.num_input_nodes + i} has {len(lst)} in-neighbors; "
                "the file format only stores binary nodes"
            )
    obj = {
        "num_input_nodes": h.num_input_nodes,
        "mode": h.mode,
        "agg_nodes": [list(lst) for lst in h.agg_nodes],
        "input_in_neighbors": [list(lst) for lst in h.input_in_neighbors],
    }
    return json.dumps(obj, indent=2) + "\n"


def deserialize_hag(text: str) -> Hag:
    """Parse and fully validate a serialized Hag."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ValidationError("top-level value must be an object")
    for key in ("num_input_nodes", "mode", "agg_nodes", "input_in_neighbors"):
        if key not in obj:
            raise ValidationError(f"missing field {key!r}")
    n = obj["num_input_nodes"]
    if not isinstance(n, int) or n < 0:
        raise ValidationError("num_input_nodes must be a non-negative integer")
    if obj["mode"] not in MODES:
        raise ValidationError(f"unknown mode {obj['mode']!r}")
    aggs = obj["agg_nodes"]
    inputs = obj["input_in_neighbors"]
    if not isinstance(aggs, list) or not isinstance(inputs, list):
        raise ValidationError("agg_nodes and input_in_neighbors must be arrays")
    for i, lst in enumerate(aggs):
        if not isinstance(lst, list) or len(lst) != 2 or not all(isinstance(u, int) for u in lst):
            raise ValidationError(f"agg_nodes[{i}] must be a 2-element array of ints")
    for v, lst in enumerate(inputs):
        if not isinstance(lst, list) or not all(isinstance(u, int) for u in lst):
            raise ValidationError(f"input_in_neighbors[{v}] must be an array of ints")
    return make_hag(n, obj["mode"], aggs, inputs)
