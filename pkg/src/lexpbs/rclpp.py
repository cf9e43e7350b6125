"""Lexicographic resource-constrained longest paths on DAGs.

Implements the bound table (a meet over the reverse-extended resources
of all paths to the destination), the label-setting enumeration with
bound pruning and optional dominance, and its two multi-path variants:
keep the N lexicographically best paths, or keep every path whose cost
clears a threshold.
"""

from __future__ import annotations

import heapq
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass, field
from graphlib import TopologicalSorter
from typing import Hashable, Iterable, NamedTuple, Optional

from .lexcore import LexValue

#: Tie tolerance for pruning and cutoff comparisons.  When arc costs
#: are dyadic rationals on a coarser grid (see colgen), all cost sums
#: are exact and this guard is inert; for other inputs it keeps
#: ulp-level rounding from cutting a path that actually ties.
PRUNE_EPS = 2.0 ** -31


class _Top:
    """The unique top resource; resource of any infeasible path."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "TOP"


TOP = _Top()


class Arc(NamedTuple):
    tail: Hashable
    head: Hashable


class Dag:
    """Directed acyclic graph with distinguished origin and destination."""

    def __init__(self, vertices: Iterable[Hashable], arcs: Iterable[Arc],
                 origin: Hashable, destination: Hashable):
        self.vertices = list(vertices)
        self.arcs = list(arcs)
        self.origin = origin
        self.destination = destination
        self.out_arcs: dict[Hashable, list[Arc]] = {v: [] for v in self.vertices}
        self.in_arcs: dict[Hashable, list[Arc]] = {v: [] for v in self.vertices}
        for a in self.arcs:
            self.out_arcs[a.tail].append(a)
            self.in_arcs[a.head].append(a)
        ts = TopologicalSorter({v: [a.tail for a in self.in_arcs[v]]
                                for v in self.vertices})
        self.topo_order = list(ts.static_order())
        self.topo_index = {v: i for i, v in enumerate(self.topo_order)}
        # Out-arcs by descending topological index of the head, so the
        # search can expand toward the destination first.
        self.out_arcs_desc = {
            v: sorted(arcs, key=lambda a: -self.topo_index[a.head])
            for v, arcs in self.out_arcs.items()
        }


class ResourceSpace(ABC):
    """Resource algebra driving the enumeration.

    Resources live in a meet-semilattice with top element TOP; the cost
    map is non-increasing, arc extensions (forward and reverse) are
    non-decreasing, and the merge of a forward and a reverse resource
    lower-bounds the resource of the concatenated path.
    """

    #: number of lexicographic cost levels
    cost_len: int

    @abstractmethod
    def initial(self, vertex) -> object:
        """Resource of the path reduced to `vertex` (forward)."""

    @abstractmethod
    def initial_reverse(self, vertex) -> object:
        """Reverse resource of the path reduced to `vertex`."""

    @abstractmethod
    def extend(self, arc: Arc, r) -> object:
        """Forward extension along `arc` (f_a)."""

    @abstractmethod
    def extend_reverse(self, arc: Arc, r) -> object:
        """Reverse extension along `arc` (g_a)."""

    @abstractmethod
    def merge(self, r, r_reverse) -> object:
        """Combine a forward and a reverse resource (h)."""

    @abstractmethod
    def meet(self, resources: Iterable) -> object:
        """Greatest lower bound of a finite set; TOP for the empty set."""

    @abstractmethod
    def leq(self, r1, r2) -> bool:
        """Partial order: r1 precedes-or-equals r2."""

    @abstractmethod
    def cost(self, r) -> LexValue:
        """Lexicographic cost; all -inf at TOP."""

    def cost_entries(self, r) -> tuple[float, ...]:
        """The cost as a raw tuple; hot-path accessor the search uses
        to avoid building LexValue wrappers per label."""
        return self.cost(r).entries

    def neg_inf_cost(self) -> LexValue:
        return LexValue.neg_infinite(self.cost_len)


BoundTable = dict


def compute_bounds(dag: Dag, space: ResourceSpace) -> BoundTable:
    """Per-vertex bounds on the reverse resource of any path to the
    destination, by dynamic programming in reverse topological order.
    Vertices with no path to the destination get TOP (empty meet)."""
    bounds: BoundTable = {}
    for v in reversed(dag.topo_order):
        if v == dag.destination:
            bounds[v] = space.initial_reverse(v)
            continue
        bounds[v] = space.meet(
            space.extend_reverse(a, bounds[a.head]) for a in dag.out_arcs[v]
        )
    return bounds


def _tuple_cmp_eps(a: tuple, b: tuple, eps: float = PRUNE_EPS) -> int:
    """Entrywise-tolerant lex comparison on raw cost tuples; the hot
    path twin of lexcore.lex_compare_eps."""
    for x, y in zip(a, b):
        if x == y:
            continue
        d = x - y
        if d > eps:
            return 1
        if d < -eps:
            return -1
    return 0


@dataclass(eq=False)
class _Label:
    vertex: Hashable
    resource: object
    parent: Optional["_Label"]
    arc: Optional[Arc]
    key: tuple  # cost tuple used as search priority
    alive: bool = True

    def path_arcs(self) -> list[Arc]:
        arcs = []
        lab = self
        while lab.arc is not None:
            arcs.append(lab.arc)
            lab = lab.parent
        arcs.reverse()
        return arcs

    def path_vertices(self) -> list[Hashable]:
        verts = [self.vertex]
        lab = self
        while lab.parent is not None:
            lab = lab.parent
            verts.append(lab.vertex)
        verts.reverse()
        return verts


@dataclass
class PathResult:
    arcs: list[Arc]
    vertices: list[Hashable]
    resource: object
    cost: LexValue


@dataclass
class SearchStats:
    saved_paths: int = 0
    cuts_by_lb: int = 0
    cuts_by_dominance: int = 0
    labels_popped: int = 0
    early_stop: bool = False


@dataclass
class SearchResult:
    paths: list[PathResult] = field(default_factory=list)
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def best(self) -> PathResult | None:
        return self.paths[0] if self.paths else None


class _LabelQueue:
    """Global pool of pending labels.

    With key priority: max-heap on the lex key, FIFO on ties.  Without:
    plain FIFO.  Removals by dominance are lazy (alive flag).
    """

    def __init__(self, use_key: bool):
        self.use_key = use_key
        self.heap: list = []
        self.fifo: deque = deque()
        self.counter = 0

    def push(self, label: _Label) -> None:
        if self.use_key:
            neg = tuple(-e for e in label.key)
            heapq.heappush(self.heap, (neg, self.counter, label))
        else:
            self.fifo.append(label)
        self.counter += 1

    def pop(self) -> _Label | None:
        if self.use_key:
            while self.heap:
                _, _, label = heapq.heappop(self.heap)
                if label.alive:
                    return label
            return None
        while self.fifo:
            label = self.fifo.popleft()
            if label.alive:
                return label
        return None


def _make_result(space: ResourceSpace, label: _Label) -> PathResult:
    return PathResult(
        arcs=label.path_arcs(),
        vertices=label.path_vertices(),
        resource=label.resource,
        cost=space.cost(label.resource),
    )


def _run_search(
    dag: Dag,
    space: ResourceSpace,
    bounds: BoundTable,
    *,
    mode: str,
    n_best: int = 1,
    threshold: LexValue | None = None,
    use_bounds: bool = True,
    use_dominance: bool = False,
    use_key_priority: bool = True,
    use_topo_arc_order: bool = True,
) -> SearchResult:
    if use_dominance and mode != "single":
        raise ValueError("dominance is only sound when a single optimum is sought")

    stats = SearchStats()
    # The hot path works on raw cost tuples; LexValue wrappers are only
    # built for the returned paths.
    cost_of = space.cost_entries
    neg_inf = (float("-inf"),) * space.cost_len
    threshold_t = None if threshold is None else tuple(threshold.entries)

    # Preliminary feasibility test at the origin: the merged cost upper
    # bounds every feasible path cost, so all -inf means none exists.
    r_o = space.initial(dag.origin)
    if r_o is TOP or cost_of(space.merge(r_o, bounds[dag.origin])) == neg_inf:
        return SearchResult(stats=stats)

    queue = _LabelQueue(use_key_priority)
    per_vertex: dict[Hashable, list[_Label]] = {v: [] for v in dag.vertices}
    root = _Label(dag.origin, r_o, None, None, cost_of(space.merge(r_o, bounds[dag.origin])))
    queue.push(root)
    if use_dominance:
        per_vertex[dag.origin].append(root)
    stats.saved_paths += 1

    # Incumbents, per mode.
    best_cost = neg_inf              # single
    best_label: _Label | None = None
    kept: list[_Label] = []          # n-best / threshold
    smallest = (float("inf"),) * space.cost_len  # n-best cutoff

    def cutoff_index() -> int:
        """Kept label at the eviction cutoff: minimal under the
        tolerant lex order, so that noise in the cost entries cannot
        shield a truly worse path from eviction."""
        at = 0
        for i in range(1, len(kept)):
            if _tuple_cmp_eps(cost_of(kept[i].resource),
                              cost_of(kept[at].resource)) < 0:
                at = i
        return at

    out_arcs = dag.out_arcs_desc if use_topo_arc_order else dag.out_arcs
    destination = dag.destination
    extend = space.extend
    merge = space.merge

    while True:
        label = queue.pop()
        if label is None:
            break
        stats.labels_popped += 1
        if use_dominance and label in per_vertex[label.vertex]:
            per_vertex[label.vertex].remove(label)
        # Early stop: the best pending key cannot beat the incumbent.
        if use_key_priority:
            if (mode == "single" and best_label is not None
                    and _tuple_cmp_eps(label.key, best_cost) <= 0):
                stats.early_stop = True
                break
            if (mode == "nbest" and len(kept) >= n_best
                    and _tuple_cmp_eps(label.key, smallest) <= 0):
                stats.early_stop = True
                break

        for arc in out_arcs[label.vertex]:
            r = extend(arc, label.resource)
            if r is TOP:
                continue
            w = arc.head
            if w == destination:
                c = cost_of(r)
                if mode == "single":
                    if c > best_cost:
                        best_cost = c
                        best_label = _Label(w, r, label, arc, c)
                elif mode == "nbest":
                    if len(kept) < n_best:
                        kept.append(_Label(w, r, label, arc, c))
                        if len(kept) == n_best:
                            smallest = cost_of(kept[cutoff_index()].resource)
                    elif _tuple_cmp_eps(c, smallest) > 0:
                        kept[cutoff_index()] = _Label(w, r, label, arc, c)
                        smallest = cost_of(kept[cutoff_index()].resource)
                else:  # threshold
                    if _tuple_cmp_eps(c, threshold_t) >= 0:
                        kept.append(_Label(w, r, label, arc, c))
                continue
            merged = merge(r, bounds[w])
            merged_cost = neg_inf if merged is TOP else cost_of(merged)
            if use_bounds:
                if mode == "single":
                    ok = _tuple_cmp_eps(merged_cost, best_cost) > 0
                elif mode == "nbest":
                    ok = (len(kept) < n_best
                          or _tuple_cmp_eps(merged_cost, smallest) > 0)
                else:
                    ok = _tuple_cmp_eps(merged_cost, threshold_t) >= 0
                if not ok:
                    stats.cuts_by_lb += 1
                    continue
            if use_dominance:
                if any(space.leq(lab.resource, r) for lab in per_vertex[w]):
                    stats.cuts_by_dominance += 1
                    continue
                for lab in per_vertex[w]:
                    if space.leq(r, lab.resource):
                        lab.alive = False
                per_vertex[w] = [lab for lab in per_vertex[w] if lab.alive]
            child = _Label(w, r, label, arc, merged_cost)
            if use_dominance:
                per_vertex[w].append(child)
            queue.push(child)
            stats.saved_paths += 1

    result = SearchResult(stats=stats)
    if mode == "single":
        if best_label is not None:
            result.paths = [_make_result(space, best_label)]
    else:
        paths = [_make_result(space, lab) for lab in kept]
        paths.sort(key=lambda p: tuple(-e for e in p.cost.entries))
        result.paths = paths
    return result


def solve_lex_longest(
    dag: Dag,
    space: ResourceSpace,
    bounds: BoundTable,
    **toggles,
) -> SearchResult:
    """Feasible origin-destination path of lexicographically maximal
    cost; `result.best` is None when no feasible path exists."""
    return _run_search(dag, space, bounds, mode="single", **toggles)


def solve_n_best(
    dag: Dag,
    space: ResourceSpace,
    bounds: BoundTable,
    n: int,
    **toggles,
) -> SearchResult:
    """The (at most) `n` feasible paths of lexicographically largest
    cost, sorted best first.  Dominance stays off: it would drop
    distinct optimal paths."""
    if n < 1:
        raise ValueError("n must be at least 1")
    toggles.pop("use_dominance", None)
    return _run_search(dag, space, bounds, mode="nbest", n_best=n, **toggles)


def solve_above_threshold(
    dag: Dag,
    space: ResourceSpace,
    bounds: BoundTable,
    threshold: LexValue,
    **toggles,
) -> SearchResult:
    """All feasible paths with cost lexicographically >= `threshold`."""
    toggles.pop("use_dominance", None)
    return _run_search(
        dag, space, bounds, mode="threshold", threshold=threshold, **toggles
    )
