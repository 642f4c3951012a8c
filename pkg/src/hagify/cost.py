"""Cost model for aggregation graphs.

One binary aggregation costs alpha, one per-node update costs beta, so a
HAG with edge set size E and A aggregation nodes over V input nodes costs

    alpha * (E - A) + (beta - alpha) * V

Aggregation counts clamp empty in-neighbor lists to zero work.  The
transfer counter tallies activation vectors that cross a worker boundary:
every edge leaving an input node plus every edge entering an input node.
Edges between aggregation nodes chain partial results inside a worker and
move nothing.
"""
from __future__ import annotations

from dataclasses import dataclass

from .graphs import Hag, InputGraph, ValidationError, consumer_cover_sizes


@dataclass(frozen=True)
class CostCoefficients:
    """alpha: cost of one binary aggregation; beta: cost of one update."""

    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValidationError("alpha must be positive")
        if self.beta < 0:
            raise ValidationError("beta must be non-negative")


DEFAULT_COEFFICIENTS = CostCoefficients()


@dataclass(frozen=True)
class CostReport:
    num_aggregations: int
    num_transfers: int
    cost_value: float
    savings: float
    num_agg_nodes: int
    num_edges: int


def evaluate_cost(h: Hag, coeff: CostCoefficients = DEFAULT_COEFFICIENTS) -> CostReport:
    """Static cost and counter report for one layer of execution on h."""
    n = h.num_input_nodes
    num_edges = h.num_edges
    num_agg = h.num_agg_nodes
    aggregations = 0
    transfers = 0
    for lst in h.agg_nodes:
        aggregations += len(lst) - 1
        transfers += sum(1 for u in lst if u < n)
    for lst in h.input_in_neighbors:
        aggregations += max(len(lst) - 1, 0)
        transfers += len(lst)
    cost_value = coeff.alpha * (num_edges - num_agg) + (coeff.beta - coeff.alpha) * n
    flat_edges = sum(consumer_cover_sizes(h))
    return CostReport(
        num_aggregations=aggregations,
        num_transfers=transfers,
        cost_value=cost_value,
        savings=coeff.alpha * (flat_edges - num_edges + num_agg),
        num_agg_nodes=num_agg,
        num_edges=num_edges,
    )


def savings(g: InputGraph, h: Hag, coeff: CostCoefficients = DEFAULT_COEFFICIENTS) -> float:
    """Cost saved by h relative to running g directly.

    Equals alpha * (|E| - |E_hag| + |V_A|); the caller is responsible for
    h actually being equivalent to g.
    """
    return coeff.alpha * (g.num_edges - h.num_edges + h.num_agg_nodes)


CSV_HEADER = "graph,mode,capacity,edges,agg_nodes,aggregations,transfers,cost,savings"


def _fmt(x) -> str:
    if isinstance(x, float) and x == int(x):
        return str(int(x))
    return str(x)


def report_csv_row(report: CostReport, graph: str, mode: str, capacity: int) -> str:
    """One CSV row matching CSV_HEADER."""
    cells = [
        graph,
        mode,
        str(capacity),
        str(report.num_edges),
        str(report.num_agg_nodes),
        str(report.num_aggregations),
        str(report.num_transfers),
        _fmt(report.cost_value),
        _fmt(report.savings),
    ]
    return ",".join(cells)


def report_to_dict(report: CostReport, graph: str, mode: str, capacity: int) -> dict:
    return {
        "graph": graph,
        "mode": mode,
        "capacity": capacity,
        "edges": report.num_edges,
        "agg_nodes": report.num_agg_nodes,
        "aggregations": report.num_aggregations,
        "transfers": report.num_transfers,
        "cost": report.cost_value,
        "savings": report.savings,
    }
