"""Independent references the search results are judged against.

`brute_force_optimal_set` exhaustively enumerates candidate hierarchies
of binary aggregation nodes for tiny set-mode graphs and returns the
cheapest equivalent HAG, so the greedy result can be compared to a true
optimum.  `prefix_lower_bound` counts the distinct ordered prefixes that
any equivalent sequential HAG is forced to materialize, a floor the
greedy sequential search is expected to hit exactly.

The enumeration stays tractable by construction: only binary nodes (a
k-way group costs the same as k-1 binary merges, so nothing is lost),
only covers that fit inside some node's neighborhood (anything else can
never be consumed), and memoization over the set of covers already
chosen.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .cost import CostCoefficients, DEFAULT_COEFFICIENTS, evaluate_cost
from .graphs import Hag, InputGraph, SET_MODE, ValidationError, make_hag, trivial_hag

MAX_ORACLE_NODES = 8
MAX_ORACLE_CAPACITY = 4


@dataclass(frozen=True)
class PrefixBound:
    """Count of distinct length >= 2 prefixes over all ordered neighbor lists."""

    lower_bound: int


def prefix_lower_bound(g: InputGraph) -> PrefixBound:
    """Minimum number of aggregations any equivalent sequential HAG performs."""
    prefixes: set[tuple[int, ...]] = set()
    for lst in g.in_neighbors:
        for i in range(2, len(lst) + 1):
            prefixes.add(lst[:i])
    return PrefixBound(lower_bound=len(prefixes))


@dataclass
class OptimalResult:
    best_cost: float
    best_hag: Hag
    num_candidates_examined: int


def _min_parts(target: int, units: list[int]) -> tuple[int, list[int]] | None:
    # Fewest pairwise-disjoint units that exactly tile `target`.
    usable = [u for u in units if u & ~target == 0]
    size = target + 1
    INF = 1 << 30
    best = [INF] * size
    parent: list[tuple[int, int] | None] = [None] * size
    best[0] = 0
    for s in range(size):
        if s & ~target or best[s] == INF:
            continue
        d = best[s] + 1
        for u in usable:
            if s & u:
                continue
            t = s | u
            if d < best[t]:
                best[t] = d
                parent[t] = (s, u)
    if best[target] == INF:
        return None
    parts = []
    s = target
    while s:
        prev, u = parent[s]
        parts.append(u)
        s = prev
    return best[target], parts


def brute_force_optimal_set(
    g: InputGraph,
    capacity: int,
    coeff: CostCoefficients = DEFAULT_COEFFICIENTS,
) -> OptimalResult:
    """Exhaustive cheapest equivalent set-mode HAG within the capacity.

    Guarded to at most 8 nodes and capacity 4; beyond that the state
    space is no longer a test fixture.
    """
    n = g.num_nodes
    if n > MAX_ORACLE_NODES:
        raise ValidationError(f"oracle limited to {MAX_ORACLE_NODES} nodes, got {n}")
    if capacity > MAX_ORACLE_CAPACITY:
        raise ValidationError(f"oracle limited to capacity {MAX_ORACLE_CAPACITY}, got {capacity}")
    if capacity < 0:
        raise ValidationError("capacity must be non-negative")

    neighbor_masks = []
    for lst in g.in_neighbors:
        mask = 0
        for u in lst:
            mask |= 1 << u
        neighbor_masks.append(mask)
    targets = sorted({m for m in neighbor_masks if m})

    singletons = [1 << v for v in range(n)]
    alpha, beta = coeff.alpha, coeff.beta

    best = {
        "cost": math.inf,
        "cands": None,   # list of (mask, left_unit, right_unit)
        "decomp": None,  # per input node, list of unit masks
    }
    examined = 0
    visited: set[frozenset[int]] = set()

    def evaluate(cands) -> None:
        nonlocal examined
        examined += 1
        units = singletons + [mask for mask, _, _ in cands]
        total_units = 0
        decomp = []
        for target in neighbor_masks:
            if target == 0:
                decomp.append([])
                continue
            solved = _min_parts(target, units)
            parts_count, parts = solved  # singletons always tile, never None
            total_units += parts_count
            decomp.append(parts)
        num_edges = total_units + 2 * len(cands)
        cost = alpha * (num_edges - len(cands)) + (beta - alpha) * n
        if cost < best["cost"]:
            best["cost"] = cost
            best["cands"] = list(cands)
            best["decomp"] = decomp

    def explore(cands, cand_masks: frozenset[int]) -> None:
        if cand_masks in visited:
            return
        visited.add(cand_masks)
        evaluate(cands)
        if len(cands) >= capacity:
            return
        units = singletons + [mask for mask, _, _ in cands]
        for i in range(len(units)):
            for j in range(i + 1, len(units)):
                a, b = units[i], units[j]
                if a & b:
                    continue
                merged = a | b
                if merged in cand_masks:
                    continue
                if not any(merged & ~t == 0 for t in targets):
                    continue
                explore(cands + [(merged, a, b)], cand_masks | {merged})

    explore([], frozenset())

    cands = best["cands"]
    node_of = {1 << v: v for v in range(n)}
    for i, (mask, _, _) in enumerate(cands):
        node_of[mask] = n + i
    agg_lists = [[node_of[left], node_of[right]] for _, left, right in cands]
    input_lists = [sorted(node_of[u] for u in parts) for parts in best["decomp"]]
    used = set()
    for lst in agg_lists + input_lists:
        used.update(x for x in lst if x >= n)
    if cands and any(n + i not in used for i in range(len(cands))):
        raise AssertionError("optimal candidate set retained an unused node")
    hag = make_hag(n, SET_MODE, agg_lists, input_lists)
    report = evaluate_cost(hag, coeff)
    if report.cost_value != best["cost"]:
        raise AssertionError("reconstructed HAG cost disagrees with enumeration")
    return OptimalResult(best_cost=best["cost"], best_hag=hag, num_candidates_examined=examined)


def verify_approximation(
    g: InputGraph,
    greedy_hag: Hag,
    oracle_result: OptimalResult,
    coeff: CostCoefficients = DEFAULT_COEFFICIENTS,
) -> bool:
    """Check the greedy result against the (1 - 1/e) guarantee.

    True iff cost(greedy) <= cost(direct)/e + (1 - 1/e) * cost(optimal),
    both sides computed at the same capacity.
    """
    greedy_cost = evaluate_cost(greedy_hag, coeff).cost_value
    trivial_cost = evaluate_cost(trivial_hag(g, SET_MODE), coeff).cost_value
    bound = trivial_cost / math.e + (1.0 - 1.0 / math.e) * oracle_result.best_cost
    return greedy_cost <= bound + 1e-9
