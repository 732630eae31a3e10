"""
Flow Engine

Exact max-flow / min-cut kernel on rational capacities (Dinic's blocking
flows with deterministic, lowest-index augmentation), the lower-bound
circulation transform, a transportation solver built on it, and residual
augmenting-path searches used by the coalition checker.

Every computation works on a private residual copy; a FlowNetwork is never
mutated by solving it.
"""

import logging
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

from .errors import InputError

logger = logging.getLogger(__name__)

ZERO = Fraction(0)

ArcFlow = Tuple[Fraction, ...]
PathStep = Tuple[int, int]


@dataclass(frozen=True)
class Arc:
    """Directed arc; capacity None means unbounded."""

    tail: Hashable
    head: Hashable
    capacity: Optional[Fraction]
    lower: Fraction = ZERO


class FlowNetwork:
    """
    Directed network with a distinguished source and sink.

    Arcs may carry lower bounds; those are honoured only by
    `feasible_flow_lower_bounds`. No arc may enter the source or leave the sink.
    """

    def __init__(self, source: Hashable = "s", sink: Hashable = "t"):
        if source == sink:
            raise InputError("Source and sink must differ")
        self.source = source
        self.sink = sink
        self.vertices: List[Hashable] = []
        self.arcs: List[Arc] = []
        self._index: Dict[Hashable, int] = {}
        self.add_vertex(source)
        self.add_vertex(sink)

    def add_vertex(self, vertex: Hashable) -> int:
        if vertex not in self._index:
            self._index[vertex] = len(self.vertices)
            self.vertices.append(vertex)
        return self._index[vertex]

    def add_arc(self, tail: Hashable, head: Hashable, capacity=None, lower=0) -> int:
        """
        Add an arc and return its index.

        Args:
            tail: Tail vertex (created on demand)
            head: Head vertex (created on demand)
            capacity: Non-negative rational, or None for unbounded
            lower: Lower bound on the arc's flow

        Raises:
            InputError: On negative values, lower > capacity, or arcs into the
                source / out of the sink
        """
        if head == self.source:
            raise InputError(f"Arc ({tail!r}, {head!r}) enters the source")
        if tail == self.sink:
            raise InputError(f"Arc ({tail!r}, {head!r}) leaves the sink")
        if tail == head:
            raise InputError(f"Arc loop at {tail!r}")
        cap = None if capacity is None else Fraction(capacity)
        low = Fraction(lower)
        if low < 0 or (cap is not None and cap < 0):
            raise InputError(f"Arc ({tail!r}, {head!r}) has a negative bound")
        if cap is not None and low > cap:
            raise InputError(f"Arc ({tail!r}, {head!r}) has lower bound above its capacity")
        self.add_vertex(tail)
        self.add_vertex(head)
        self.arcs.append(Arc(tail, head, cap, low))
        return len(self.arcs) - 1

    def index_of(self, vertex: Hashable) -> int:
        return self._index[vertex]

    def has_lower_bounds(self) -> bool:
        return any(arc.lower > 0 for arc in self.arcs)

    def sentinel(self) -> Fraction:
        """Stand-in for unbounded capacity: every finite bound summed, plus one."""
        total = sum((arc.capacity for arc in self.arcs if arc.capacity is not None), ZERO)
        total += sum((arc.lower for arc in self.arcs), ZERO)
        return total + 1

    def net_out_of_source(self, flow: Sequence[Fraction]) -> Fraction:
        value = ZERO
        for k, arc in enumerate(self.arcs):
            if arc.tail == self.source:
                value += flow[k]
            if arc.head == self.source:
                value -= flow[k]
        return value


@dataclass(frozen=True)
class FlowResult:
    """Maximum flow value, per-arc flow, and the maximal source side of a min cut."""

    value: Fraction
    flow: ArcFlow
    source_side: FrozenSet[Hashable]


@dataclass(frozen=True)
class FeasibleFlow:
    feasible: bool
    flow: Optional[ArcFlow]


class _Residual:
    """Paired-edge residual graph; edge e and e ^ 1 are mutual reverses."""

    def __init__(self, size: int):
        self.size = size
        self.adj: List[List[int]] = [[] for _ in range(size)]
        self.head: List[int] = []
        self.cap: List[Fraction] = []

    def add_edge(self, u: int, v: int, capacity: Fraction) -> int:
        eid = len(self.head)
        self.head.append(v)
        self.cap.append(capacity)
        self.adj[u].append(eid)
        self.head.append(u)
        self.cap.append(ZERO)
        self.adj[v].append(eid + 1)
        return eid

    def max_flow(self, s: int, t: int) -> Fraction:
        total = ZERO
        phases = 0
        while True:
            level = self._levels(s, t)
            if level is None:
                logger.debug(f"Max flow {total} after {phases} phase(s)")
                return total
            phases += 1
            total += self._blocking_flow(s, t, level, [0] * self.size)

    def _levels(self, s: int, t: int) -> Optional[List[int]]:
        level = [-1] * self.size
        level[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for e in self.adj[u]:
                w = self.head[e]
                if self.cap[e] > 0 and level[w] < 0:
                    level[w] = level[u] + 1
                    queue.append(w)
        return level if level[t] >= 0 else None

    def _blocking_flow(self, s: int, t: int, level: List[int], it: List[int]) -> Fraction:
        pushed = ZERO
        path: List[int] = []
        v = s
        while True:
            if v == t:
                delta = min(self.cap[e] for e in path)
                for e in path:
                    self.cap[e] -= delta
                    self.cap[e ^ 1] += delta
                pushed += delta
                path = []
                v = s
                continue
            edges = self.adj[v]
            while it[v] < len(edges):
                e = edges[it[v]]
                if self.cap[e] > 0 and level[self.head[e]] == level[v] + 1:
                    break
                it[v] += 1
            else:
                if v == s:
                    return pushed
                # dead end: prune v from the level graph and retreat
                level[v] = -1
                e = path.pop()
                v = self.head[e ^ 1]
                it[v] += 1
                continue
            e = edges[it[v]]
            path.append(e)
            v = self.head[e]

    def reaching(self, t: int) -> set:
        """Vertices with a residual path to t."""
        seen = {t}
        queue = deque([t])
        while queue:
            w = queue.popleft()
            for f in self.adj[w]:
                u = self.head[f]
                if u not in seen and self.cap[f ^ 1] > 0:
                    seen.add(u)
                    queue.append(u)
        return seen


def _validate_plain(net: FlowNetwork) -> None:
    if net.has_lower_bounds():
        raise InputError("max_flow does not accept lower bounds; use feasible_flow_lower_bounds")


def max_flow(net: FlowNetwork) -> FlowResult:
    """
    Maximum s-t flow.

    Args:
        net: Network without lower bounds

    Returns:
        FlowResult with the value, per-arc flows, and the inclusion-maximal
        source side of a minimum cut

    Raises:
        InputError: If the network carries lower bounds
    """
    _validate_plain(net)
    big = net.sentinel()
    residual = _Residual(len(net.vertices))
    used_caps = []
    edge_ids = []
    for arc in net.arcs:
        cap = big if arc.capacity is None else arc.capacity
        used_caps.append(cap)
        edge_ids.append(residual.add_edge(net.index_of(arc.tail), net.index_of(arc.head), cap))

    s, t = net.index_of(net.source), net.index_of(net.sink)
    value = residual.max_flow(s, t)
    flow = tuple(used_caps[k] - residual.cap[eid] for k, eid in enumerate(edge_ids))
    reach_sink = residual.reaching(t)
    source_side = frozenset(v for k, v in enumerate(net.vertices) if k not in reach_sink)
    return FlowResult(value, flow, source_side)


def min_cut_max_source(result: FlowResult) -> FrozenSet[Hashable]:
    """
    Inclusion-maximal source side of a minimum cut.

    The complement of the vertices that still reach the sink in the residual
    network of a maximum flow; minimum cuts form a lattice, so this side is
    the largest one.
    """
    return result.source_side


def cut_capacity(net: FlowNetwork, source_side: FrozenSet[Hashable]) -> Optional[Fraction]:
    """Capacity of the cut leaving `source_side`; None when an unbounded arc crosses it."""
    total = ZERO
    for arc in net.arcs:
        if arc.tail in source_side and arc.head not in source_side:
            if arc.capacity is None:
                return None
            total += arc.capacity
    return total


def feasible_flow_lower_bounds(net: FlowNetwork) -> FeasibleFlow:
    """
    Find an s-t flow meeting every lower bound and capacity.

    The flow value is free: an unbounded return arc sink -> source is added
    internally, and the resulting circulation problem is reduced to one max
    flow between a super source and a super sink.

    Returns:
        FeasibleFlow(feasible, flow); flow is None when infeasible
    """
    n = len(net.vertices)
    super_source, super_sink = n, n + 1
    big = net.sentinel()
    residual = _Residual(n + 2)
    excess = [ZERO] * n
    edge_ids = []
    for arc in net.arcs:
        u, v = net.index_of(arc.tail), net.index_of(arc.head)
        cap = big if arc.capacity is None else arc.capacity - arc.lower
        edge_ids.append(residual.add_edge(u, v, cap))
        excess[v] += arc.lower
        excess[u] -= arc.lower
    residual.add_edge(net.index_of(net.sink), net.index_of(net.source), big)

    required = ZERO
    for v, amount in enumerate(excess):
        if amount > 0:
            residual.add_edge(super_source, v, amount)
            required += amount
        elif amount < 0:
            residual.add_edge(v, super_sink, -amount)

    value = residual.max_flow(super_source, super_sink)
    if value != required:
        logger.debug(f"Lower bounds infeasible: routed {value} of {required}")
        return FeasibleFlow(False, None)

    flow = []
    for arc, eid in zip(net.arcs, edge_ids):
        cap = big if arc.capacity is None else arc.capacity - arc.lower
        flow.append(arc.lower + cap - residual.cap[eid])
    return FeasibleFlow(True, tuple(flow))


def augmenting_path(
    net: FlowNetwork,
    flow: Sequence[Fraction],
    origin: Hashable,
    target: Hashable,
    blocked: Iterable[int] = (),
) -> Optional[List[PathStep]]:
    """
    Shortest residual path from `origin` to `target` for a given flow.

    Forward steps need spare capacity, backward steps need flow above the
    arc's lower bound. Arcs listed in `blocked` are ignored.

    Returns:
        List of (arc index, +1 forward / -1 backward), or None
    """
    blocked = set(blocked)
    outgoing: Dict[Hashable, List[PathStep]] = {v: [] for v in net.vertices}
    for k, arc in enumerate(net.arcs):
        if k in blocked:
            continue
        if arc.capacity is None or flow[k] < arc.capacity:
            outgoing[arc.tail].append((k, 1))
        if flow[k] > arc.lower:
            outgoing[arc.head].append((k, -1))

    parent: Dict[Hashable, Optional[PathStep]] = {origin: None}
    queue = deque([origin])
    while queue:
        u = queue.popleft()
        if u == target:
            break
        for k, direction in outgoing[u]:
            arc = net.arcs[k]
            w = arc.head if direction > 0 else arc.tail
            if w not in parent:
                parent[w] = (k, direction)
                queue.append(w)
    if target not in parent or origin == target:
        return None

    steps: List[PathStep] = []
    v = target
    while parent[v] is not None:
        k, direction = parent[v]
        steps.append((k, direction))
        arc = net.arcs[k]
        v = arc.tail if direction > 0 else arc.head
    steps.reverse()
    return steps


def push_along(
    net: FlowNetwork, flow: Sequence[Fraction], steps: Sequence[PathStep], limit: Optional[Fraction] = None
) -> Tuple[ArcFlow, Fraction]:
    """
    Push the bottleneck amount (capped by `limit`) along a residual path.

    Returns:
        (new flow, amount pushed)
    """
    slack = []
    for k, direction in steps:
        arc = net.arcs[k]
        if direction > 0:
            if arc.capacity is not None:
                slack.append(arc.capacity - flow[k])
        else:
            slack.append(flow[k] - arc.lower)
    if limit is not None:
        slack.append(limit)
    if not slack:
        raise InputError("Residual path is unbounded; pass a limit")
    delta = min(slack)
    new_flow = list(flow)
    for k, direction in steps:
        new_flow[k] += delta * direction
    return tuple(new_flow), delta


def transportation(
    supplies: Mapping[Hashable, Fraction],
    demands: Mapping[Hashable, Fraction],
    allowed_edges: Iterable[Tuple[Hashable, Hashable]],
) -> Optional[Dict[Tuple[Hashable, Hashable], Fraction]]:
    """
    Ship every supply exactly and meet every demand exactly over allowed edges.

    Supplier and receiver sets may overlap (a circulation on one level uses
    the same nodes on both sides).

    Args:
        supplies: supplier -> amount to send
        demands: receiver -> amount to receive
        allowed_edges: Directed (supplier, receiver) pairs

    Returns:
        (supplier, receiver) -> positive amount, or None when infeasible

    Raises:
        InputError: If totals differ or an amount is negative
    """
    supplies = {k: Fraction(v) for k, v in supplies.items()}
    demands = {k: Fraction(v) for k, v in demands.items()}
    if any(v < 0 for v in supplies.values()) or any(v < 0 for v in demands.values()):
        raise InputError("Transportation amounts must be non-negative")
    if sum(supplies.values(), ZERO) != sum(demands.values(), ZERO):
        raise InputError(
            f"Unbalanced transportation: supplies {sum(supplies.values(), ZERO)} != "
            f"demands {sum(demands.values(), ZERO)}"
        )

    net = FlowNetwork("source", "sink")
    for i in sorted(supplies):
        net.add_arc("source", ("give", i), supplies[i], supplies[i])
    lanes = []
    for i, j in sorted(set(allowed_edges)):
        if i in supplies and j in demands:
            lanes.append(((i, j), net.add_arc(("give", i), ("take", j), None)))
    for j in sorted(demands):
        net.add_arc(("take", j), "sink", demands[j], demands[j])

    result = feasible_flow_lower_bounds(net)
    if not result.feasible:
        return None
    return {pair: result.flow[k] for pair, k in lanes if result.flow[k] > 0}
