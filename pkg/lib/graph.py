"""
Graph Core

Immutable undirected simple graph over integer node ids, with the set
operations every other module builds on: neighbourhoods of node sets,
induced subgraphs, independence tests and connected components.

Adjacency is held in a frozen networkx graph; node sets are returned as
frozensets and every ordered output is sorted by node id.
"""

import logging
from typing import AbstractSet, FrozenSet, Iterable, List, Tuple

import networkx as nx

from .errors import InputError

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


class Graph:
    """
    Undirected simple graph G = (N, E).

    The top-level instance of a problem must be connected with at least two
    nodes (pass ``require_connected=True``); induced subgraphs may be
    disconnected and skip that check.
    """

    def __init__(self, node_ids: Iterable[int], edges: Iterable[Edge], require_connected: bool = False):
        """
        Build and validate a graph.

        Args:
            node_ids: Distinct non-negative integer ids
            edges: Unordered pairs (i, j) with i != j, both endpoints in node_ids
            require_connected: Enforce the model assumption of a connected
                graph with at least two nodes

        Raises:
            InputError: On duplicate ids, self-loops, duplicate edges,
                unknown endpoints, or a failed connectivity requirement
        """
        ids = list(node_ids)
        for node in ids:
            if isinstance(node, bool) or not isinstance(node, int) or node < 0:
                raise InputError(f"Node ids must be non-negative integers, got {node!r}")
        if len(set(ids)) != len(ids):
            raise InputError("Duplicate node ids")

        self._nx = nx.Graph()
        self._nx.add_nodes_from(sorted(ids))
        seen = set()
        for edge in edges:
            i, j = edge
            if i == j:
                raise InputError(f"Self-loop at node {i}")
            if i not in self._nx or j not in self._nx:
                raise InputError(f"Edge ({i}, {j}) has an endpoint outside the node set")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise InputError(f"Duplicate edge {key}")
            seen.add(key)
            self._nx.add_edge(*key)
        nx.freeze(self._nx)

        self.node_ids: Tuple[int, ...] = tuple(sorted(ids))
        self.edges: FrozenSet[Edge] = frozenset(seen)
        self._adjacency = {node: frozenset(self._nx.neighbors(node)) for node in self.node_ids}
        self._index = {node: k for k, node in enumerate(self.node_ids)}

        if require_connected:
            if len(self.node_ids) < 2:
                raise InputError("The input graph needs at least two nodes")
            if not nx.is_connected(self._nx):
                raise InputError("The input graph must be connected")

    def __len__(self) -> int:
        return len(self.node_ids)

    def __contains__(self, node: int) -> bool:
        return node in self._index

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.node_ids == other.node_ids and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.node_ids, self.edges))

    def __repr__(self) -> str:
        return f"Graph(nodes={len(self.node_ids)}, edges={len(self.edges)})"

    @property
    def nx_graph(self) -> nx.Graph:
        """Read-only networkx view of the graph."""
        return self._nx

    def index(self, node: int) -> int:
        """Position of a node in the sorted id order (bit position in subset masks)."""
        return self._index[node]

    def sorted_edges(self) -> List[Edge]:
        return sorted(self.edges)

    def neighbors(self, node: int) -> FrozenSet[int]:
        """N_i, the neighbours of a single node."""
        self._check_ids((node,))
        return self._adjacency[node]

    def degree(self, node: int) -> int:
        return len(self.neighbors(node))

    def neighborhood(self, s: AbstractSet[int]) -> FrozenSet[int]:
        """
        N_S, the union of the neighbourhoods of the nodes in S.

        N_S may intersect S, and N_∅ = ∅.

        Args:
            s: Node set

        Returns:
            Set of nodes adjacent to at least one node of S
        """
        self._check_ids(s)
        result = set()
        for node in s:
            result |= self._adjacency[node]
        return frozenset(result)

    def induced_subgraph(self, s: AbstractSet[int]) -> "Graph":
        """
        G_S, the subgraph induced by a nonempty node set.

        Connectivity is not required of the result.

        Raises:
            InputError: If S is empty or contains unknown ids
        """
        if not s:
            raise InputError("Induced subgraph needs a nonempty node set")
        self._check_ids(s)
        members = frozenset(s)
        edges = [(i, j) for (i, j) in self.edges if i in members and j in members]
        return Graph(members, edges)

    def is_independent(self, s: AbstractSet[int]) -> bool:
        """True iff no edge has both endpoints in S (vacuously true for ∅ and singletons)."""
        self._check_ids(s)
        members = frozenset(s)
        return all(not (self._adjacency[node] & members) for node in members)

    def connected_components(self) -> List[FrozenSet[int]]:
        """Maximal connected node sets, ordered by their smallest id."""
        components = [frozenset(c) for c in nx.connected_components(self._nx)]
        return sorted(components, key=min)

    def is_connected(self) -> bool:
        return len(self.node_ids) > 0 and nx.is_connected(self._nx)

    def _check_ids(self, nodes: Iterable[int]) -> None:
        unknown = [node for node in nodes if node not in self._index]
        if unknown:
            raise InputError(f"Unknown node id(s): {sorted(unknown)}")
