"""Greedy construction of a HAG under an aggregation-node budget.

Each iteration finds the pair of nodes whose joint aggregation is most
redundant, materializes that binary aggregation as a new node, and
rewires every consumer of the pair through it.  Set mode counts a pair as
redundant at every node aggregating both members; sequential mode only at
nodes whose ordered list starts with exactly that pair, because only
common prefixes of a non-commutative fold can be shared.  The loop stops
when the budget is exhausted or no pair is worth merging (redundancy
below 2).

The hot path keeps pair redundancies in a max-heap with lazy
invalidation: counts live in a dict, every change bumps a version stamp
and pushes a fresh entry, and stale entries are dropped on pop.  Pairs
are encoded as v1 * stride + v2 so that heap ordering breaks count ties
by the lexicographically smallest pair, which keeps the whole search
deterministic.

`search_naive` re-scans every pair each iteration instead of using the
index.  It exists as a cross-check: both implementations must produce
identical HAGs.
"""
from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations

from .cost import CostCoefficients, DEFAULT_COEFFICIENTS
from .graphs import (
    SEQUENTIAL_MODE,
    SET_MODE,
    Hag,
    InputGraph,
    MODES,
    ValidationError,
    check_equivalence,
)

TIE_BREAK_LEX = "lex"


@dataclass(frozen=True)
class SearchConfig:
    """Budget and policy knobs for one search run.

    capacity bounds the number of aggregation nodes.  min_redundancy is
    the merge threshold; 2 is the algorithm's guard and anything higher
    is for experiments only.
    """

    capacity: int
    mode: str = SET_MODE
    tie_break: str = TIE_BREAK_LEX
    min_redundancy: int = 2

    def __post_init__(self):
        if self.capacity < 0:
            raise ValidationError("capacity must be non-negative")
        if self.mode not in MODES:
            raise ValidationError(f"unknown mode {self.mode!r}")
        if self.tie_break != TIE_BREAK_LEX:
            raise ValidationError(f"unknown tie-break policy {self.tie_break!r}")
        if self.min_redundancy < 2:
            raise ValidationError("min_redundancy must be at least 2")


@dataclass(frozen=True)
class TraceStep:
    pair: tuple[int, int]
    redundancy: int
    new_node: int
    delta_cost: float


@dataclass
class SearchTrace:
    """Per-iteration log of merges; delta_cost is -alpha * (redundancy - 1)."""

    steps: list[TraceStep] = field(default_factory=list)

    def to_jsonl(self) -> str:
        import json

        lines = [
            json.dumps(
                {
                    "iteration": i,
                    "pair": list(step.pair),
                    "redundancy": step.redundancy,
                    "new_node": step.new_node,
                    "delta_cost": step.delta_cost,
                },
                separators=(", ", ": "),
            )
            for i, step in enumerate(self.steps)
        ]
        return "\n".join(lines) + ("\n" if lines else "")


class RedundancyIndex:
    """Max-priority view over pair redundancy counts with lazy deletion.

    pair_counts holds the last count registered for each pair and every
    registration pushes a heap claim (-count, pair); popped claims that
    disagree with pair_counts are stale and dropped.  Counts of existing
    pairs only ever fall during the search (consumers never regain old
    members), so a registered count is always an upper bound on the true
    one.  The search verifies the winner against ground truth on pop and
    re-registers pairs that shrank, which keeps the argmax and the
    smallest-pair tie-break exact without paying for per-edge decrements.
    """

    __slots__ = ("min_count", "pair_counts", "heap")

    def __init__(self, min_count: int):
        self.min_count = min_count
        self.pair_counts: dict[int, int] = {}
        self.heap: list[tuple[int, int]] = []

    def bulk_load(self, counts: dict[int, int]) -> None:
        min_count = self.min_count
        self.pair_counts = {key: c for key, c in counts.items() if c >= min_count}
        self.heap = [(-c, key) for key, c in self.pair_counts.items()]
        heapq.heapify(self.heap)

    def register(self, key: int, count: int) -> None:
        """Record a pair's count, replacing any previous claim.

        Counts never rise again once tracked lazily, so anything below the
        merge threshold is dropped for good.
        """
        if count >= self.min_count:
            self.pair_counts[key] = count
            heapq.heappush(self.heap, (-count, key))
        else:
            self.pair_counts.pop(key, None)

    def adjust(self, key: int, delta: int) -> None:
        """Exact incremental update; counts below the threshold stay
        tracked because they may still grow."""
        count = self.pair_counts.get(key, 0) + delta
        if count < 0:
            raise AssertionError(f"redundancy count for pair {key} went negative")
        if count == 0:
            self.pair_counts.pop(key, None)
            return
        self.pair_counts[key] = count
        if delta > 0 and count >= self.min_count:
            heapq.heappush(self.heap, (-count, key))

    def pop_best(self) -> tuple[int, int] | None:
        """Best registered pair (ties: smallest encoded pair), or None."""
        heap = self.heap
        counts = self.pair_counts
        while heap:
            neg_count, key = heapq.heappop(heap)
            if counts.get(key) != -neg_count:
                continue
            return key, -neg_count
        return None


def default_capacity(g: InputGraph) -> int:
    """Default aggregation-node budget: a quarter of the node count."""
    return g.num_nodes // 4


def redundancy(h: Hag, v1: int, v2: int, mode: str | None = None) -> int:
    """How many nodes of h currently aggregate v1 and v2 together.

    Set mode: both appear anywhere in the in-neighbor list.  Sequential
    mode: the list starts exactly [v1, v2].
    """
    if v1 == v2:
        raise ValidationError("redundancy is defined for distinct nodes")
    mode = h.mode if mode is None else mode
    lists = list(h.agg_nodes) + list(h.input_in_neighbors)
    if mode == SEQUENTIAL_MODE:
        return sum(1 for lst in lists if lst[:2] == (v1, v2))
    return sum(1 for lst in lists if v1 in lst and v2 in lst)


def _finish(g: InputGraph, mode: str, lists: list[list[int]]) -> Hag:
    n = g.num_nodes
    return Hag(
        num_input_nodes=n,
        mode=mode,
        agg_nodes=tuple(tuple(lst) for lst in lists[n:]),
        input_in_neighbors=tuple(tuple(lst) for lst in lists[:n]),
    )


def _check_step(g: InputGraph, mode: str, lists: list[list[int]]) -> None:
    # Debug-mode invariants, re-checked after every merge: the working
    # graph stays acyclic, equivalent, and every aggregation node is used.
    interim = _finish(g, mode, lists)
    result = check_equivalence(g, interim)
    if not result:
        raise AssertionError(f"search broke equivalence: {result.describe()}")
    n = g.num_nodes
    used = set()
    for lst in lists:
        used.update(u for u in lst if u >= n)
    for w in range(n, len(lists)):
        if w not in used:
            raise AssertionError(f"aggregation node {w} lost all out-edges")


# ---- set mode -------------------------------------------------------------

def _search_set(g, cfg, coeff, trace, check_invariants):
    # In-neighbor order carries no meaning in set mode, so the working
    # state holds sets; the final HAG lists them sorted.
    n = g.num_nodes
    in_sets: list[set[int]] = [set(lst) for lst in g.in_neighbors]
    max_new = min(cfg.capacity, max(g.num_edges, 1))
    stride = n + max_new + 1
    min_count = cfg.min_redundancy

    out: list[set[int]] = [set() for _ in range(n)]
    for v, members in enumerate(in_sets):
        for u in members:
            out[u].add(v)

    # Seed the index.  Sparse graphs enumerate co-occurring pairs exactly;
    # dense ones would pay sum-of-degree-squared for that, so they seed
    # every node pair with the cheap degree bound instead and let the
    # pop-time verification walk claims down to the truth.
    pair_stream = sum(len(m) * (len(m) - 1) // 2 for m in in_sets)
    seed_counts: dict[int, int]
    if pair_stream <= n * (n - 1) // 2:
        exact = Counter()
        for members in in_sets:
            if len(members) >= 2:
                exact.update(a * stride + b for a, b in combinations(sorted(members), 2))
        seed_counts = dict(exact)
    else:
        seed_counts = {}
        for a in range(n):
            bound_a = len(out[a])
            if bound_a < min_count:
                continue
            a_base = a * stride
            for b in range(a + 1, n):
                bound = min(bound_a, len(out[b]))
                if bound >= min_count:
                    seed_counts[a_base + b] = bound
    index = RedundancyIndex(min_count)
    index.bulk_load(seed_counts)

    heap = index.heap
    claims = index.pair_counts
    heappop = heapq.heappop
    heappush = heapq.heappush
    claims_get = claims.get
    budget = n + cfg.capacity
    next_id = n
    while next_id < budget:
        while heap:
            neg_count, key = heappop(heap)
            if claims_get(key) == -neg_count:
                break
        else:
            break
        claimed = -neg_count
        v1, v2 = divmod(key, stride)
        out_v1 = out[v1]
        out_v2 = out[v2]
        len_v1 = len(out_v1)
        len_v2 = len(out_v2)
        if len_v1 < claimed or len_v2 < claimed:
            # Disproved by size alone; tighten the claim without paying
            # for the intersection.
            bound = len_v1 if len_v1 < len_v2 else len_v2
            if bound >= min_count:
                claims[key] = bound
                heappush(heap, (-bound, key))
            else:
                del claims[key]
            continue
        consumers = out_v1 & out_v2
        count = len(consumers)
        if count != claimed:
            # The claim predates rewires that peeled consumers off this
            # pair; record the true count and look again.
            if count >= min_count:
                claims[key] = count
                heappush(heap, (-count, key))
            else:
                del claims[key]
            continue
        w = next_id
        next_id += 1
        out_w = set()
        gained: list[int] = []
        for u in consumers:
            members = in_sets[u]
            members.remove(v1)
            members.remove(v2)
            gained.extend([x * stride + w for x in members])
            members.add(w)
            out_v1.discard(u)
            out_v2.discard(u)
            out_w.add(u)
        # Every pair involving w starts at its exact count here and can
        # only shrink afterwards.
        for pair_key, pair_count in Counter(gained).items():
            if pair_count >= min_count:
                claims[pair_key] = pair_count
                heappush(heap, (-pair_count, pair_key))
        in_sets.append({v1, v2})
        out.append(out_w)
        out_v1.add(w)
        out_v2.add(w)
        del claims[key]  # only w's own set still holds the pair, below threshold
        trace.steps.append(
            TraceStep(pair=(v1, v2), redundancy=count, new_node=w, delta_cost=-coeff.alpha * (count - 1))
        )
        if check_invariants:
            _check_step(g, SET_MODE, [sorted(s) for s in in_sets])
    return _finish(g, SET_MODE, [sorted(s) for s in in_sets])


# ---- sequential mode ------------------------------------------------------

def _search_sequential(g, cfg, coeff, trace, check_invariants):
    n = g.num_nodes
    lists: list[list[int]] = [list(lst) for lst in g.in_neighbors]
    max_new = min(cfg.capacity, max(g.num_edges, 1))
    stride = n + max_new + 1

    heads: dict[int, set[int]] = {}
    counts: Counter = Counter()
    for v, lst in enumerate(lists):
        if len(lst) >= 2:
            key = lst[0] * stride + lst[1]
            counts[key] += 1
            heads.setdefault(key, set()).add(v)
    index = RedundancyIndex(cfg.min_redundancy)
    index.bulk_load(counts)

    while len(lists) - n < cfg.capacity:
        best = index.pop_best()
        if best is None:
            break
        key, count = best
        v1, v2 = divmod(key, stride)
        consumers = heads.pop(key, set())
        if len(consumers) != count:
            raise AssertionError(
                f"index count {count} disagrees with {len(consumers)} prefix holders for ({v1}, {v2})"
            )
        w = len(lists)
        for u in sorted(consumers):
            lst = lists[u]
            lst[0:2] = [w]
            index.adjust(key, -1)
            if len(lst) >= 2:
                new_key = w * stride + lst[1]
                index.adjust(new_key, +1)
                heads.setdefault(new_key, set()).add(u)
        lists.append([v1, v2])
        index.adjust(key, +1)
        heads[key] = {w}
        trace.steps.append(
            TraceStep(pair=(v1, v2), redundancy=count, new_node=w, delta_cost=-coeff.alpha * (count - 1))
        )
        if check_invariants:
            _check_step(g, SEQUENTIAL_MODE, lists)
    return _finish(g, SEQUENTIAL_MODE, lists)


def search(
    g: InputGraph,
    cfg: SearchConfig,
    coeff: CostCoefficients = DEFAULT_COEFFICIENTS,
    *,
    check_invariants: bool = False,
) -> tuple[Hag, SearchTrace]:
    """Greedily build an equivalent HAG for g within cfg.capacity.

    Returns the HAG and a per-iteration trace.  Deterministic: equal
    redundancies resolve to the smallest pair.  check_invariants re-runs
    the full equivalence check after every iteration (tests only; it is
    quadratic in practice).
    """
    trace = SearchTrace()
    if cfg.mode == SEQUENTIAL_MODE:
        hag = _search_sequential(g, cfg, coeff, trace, check_invariants)
    else:
        hag = _search_set(g, cfg, coeff, trace, check_invariants)
    return hag, trace


def search_naive(
    g: InputGraph,
    cfg: SearchConfig,
    coeff: CostCoefficients = DEFAULT_COEFFICIENTS,
) -> tuple[Hag, SearchTrace]:
    """Reference search that re-scans all pairs every iteration.

    Quadratic per step; only for small graphs and for validating the
    indexed implementation against.
    """
    n = g.num_nodes
    sequential = cfg.mode == SEQUENTIAL_MODE
    lists: list[list[int]] = [sorted(lst) if not sequential else list(lst) for lst in g.in_neighbors]
    trace = SearchTrace()

    while len(lists) - n < cfg.capacity:
        counts: Counter = Counter()
        if sequential:
            for lst in lists:
                if len(lst) >= 2:
                    counts[(lst[0], lst[1])] += 1
        else:
            for lst in lists:
                if len(lst) >= 2:
                    counts.update(combinations(lst, 2))
        best_pair = None
        best_count = 0
        for pair, count in counts.items():
            if count < cfg.min_redundancy:
                continue
            if count > best_count or (count == best_count and pair < best_pair):
                best_pair = pair
                best_count = count
        if best_pair is None:
            break
        v1, v2 = best_pair
        w = len(lists)
        for u in range(len(lists)):
            lst = lists[u]
            if sequential:
                if lst[:2] == [v1, v2]:
                    lst[0:2] = [w]
            elif v1 in lst and v2 in lst:
                lst.remove(v1)
                lst.remove(v2)
                lst.append(w)  # largest id so far keeps the list sorted
        lists.append([v1, v2])
        trace.steps.append(
            TraceStep(pair=(v1, v2), redundancy=best_count, new_node=w, delta_cost=-coeff.alpha * (best_count - 1))
        )
    return _finish(g, cfg.mode, lists), trace
