"""Synthetic graph builders used by the CLI and the test batteries."""
from __future__ import annotations

import random

from .graphs import InputGraph, ValidationError, make_input_graph


def diamond4() -> InputGraph:
    """Four nodes where {0,1} and {2,3} each aggregate the other pair twice."""
    return make_input_graph([[2, 3], [2, 3], [0, 1], [0, 1]])


def share(m: int, n: int) -> InputGraph:
    """m consumer nodes that each aggregate the same n source nodes.

    Consumers are ids 0..m-1, sources m..m+n-1.
    """
    if m < 0 or n < 0:
        raise ValidationError("share sizes must be non-negative")
    sources = list(range(m, m + n))
    return make_input_graph([list(sources) for _ in range(m)] + [[] for _ in range(n)])


def erdos_renyi(n: int, p: float, seed: int, *, shuffle_order: bool = False) -> InputGraph:
    """Directed G(n, p); each ordered pair (u, v), u != v, independently.

    Neighbor lists come out in ascending source order unless
    shuffle_order, which permutes each list (relevant in sequential mode).
    """
    if not 0.0 <= p <= 1.0:
        raise ValidationError("p must be in [0, 1]")
    rng = random.Random(seed)
    lists: list[list[int]] = []
    for v in range(n):
        lst = [u for u in range(n) if u != v and rng.random() < p]
        if shuffle_order:
            rng.shuffle(lst)
        lists.append(lst)
    return make_input_graph(lists, num_nodes=n)


def random_edge_count_graph(n: int, num_edges: int, seed: int) -> InputGraph:
    """Random simple directed graph with exactly num_edges edges."""
    space = n * (n - 1)
    if num_edges > space:
        raise ValidationError(f"{num_edges} edges do not fit in {n} nodes")
    rng = random.Random(seed)
    lists: list[list[int]] = [[] for _ in range(n)]
    for code in rng.sample(range(space), num_edges):
        v, u = divmod(code, n - 1)
        if u >= v:
            u += 1
        lists[v].append(u)
    return make_input_graph(lists, num_nodes=n)


def edge_list_text(g: InputGraph) -> str:
    """Edge-list form that round-trips through load_graph."""
    lines = [f"# nodes: {g.num_nodes}"]
    for v, lst in enumerate(g.in_neighbors):
        lines.extend(f"{u} {v}" for u in lst)
    return "\n".join(lines) + "\n"
