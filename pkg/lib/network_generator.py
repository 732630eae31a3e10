"""
Network Generator

Reproducible experiment instances: a 2-D lattice, Erdős–Rényi G(n, p),
preferential attachment with attachment probability ∝ degree^power, and
Watts–Strogatz small worlds, each paired with a homogeneous or hotspot
endowment profile.

Node ids are 1..n. Every random choice flows from one numpy generator
seeded with the spec's seed; each connectivity retry draws a fresh
sub-seed from it.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Optional, Tuple

import networkx as nx
import numpy as np

from .endowments import DistributionSpec, Endowments
from .errors import GenerationError, InputError
from .graph import Graph
from .utils import format_rational, to_fraction

MODELS = ("lattice", "er", "ba", "ws")
DRAW_KINDS = ("constant", "uniform", "bernoulli")
MAX_RETRIES = 100


@dataclass(frozen=True)
class EndowmentProfile:
    """
    Mean endowments of a generated instance.

    homogeneous: every node gets `base`.
    hotspots: `count` nodes get `hot`, the rest `base`; the hot nodes are
    drawn at random unless `hot_ids` lists them.
    """

    kind: str
    base: Fraction
    hot: Fraction = Fraction(0)
    count: int = 0
    hot_ids: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in ("homogeneous", "hotspots"):
            raise InputError(f"Unknown endowment profile {self.kind!r}")
        if self.base <= 0:
            raise InputError("Endowment values must be positive")
        if self.kind == "hotspots":
            if self.hot <= 0:
                raise InputError("Endowment values must be positive")
            if len(set(self.hot_ids)) != len(self.hot_ids):
                raise InputError("Listed hotspot ids must be distinct")
            if self.hot_ids and self.count != len(self.hot_ids):
                raise InputError("Hotspot count does not match the listed ids")
            if self.count < 0:
                raise InputError("Hotspot count must be non-negative")

    @classmethod
    def homogeneous(cls, value: Any) -> "EndowmentProfile":
        return cls("homogeneous", to_fraction(value))

    @classmethod
    def hotspots(cls, base: Any, hot: Any, count: int = 0, hot_ids=()) -> "EndowmentProfile":
        ids = tuple(int(i) for i in hot_ids)
        return cls("hotspots", to_fraction(base), to_fraction(hot), len(ids) if ids else int(count), ids)

    @classmethod
    def parse(cls, text: str) -> "EndowmentProfile":
        """
        Read a command-line profile.

        Formats:
            homogeneous:30
            hotspots:30:300:2          two hot nodes at random
            hotspots:30:300:@4,17      hot nodes 4 and 17

        Raises:
            InputError: On any other form
        """
        parts = text.strip().split(":")
        if parts[0] == "homogeneous" and len(parts) == 2:
            return cls.homogeneous(parts[1])
        if parts[0] == "hotspots" and len(parts) == 4:
            if parts[3].startswith("@"):
                ids = [int(i) for i in parts[3][1:].split(",") if i]
                return cls.hotspots(parts[1], parts[2], hot_ids=ids)
            return cls.hotspots(parts[1], parts[2], count=int(parts[3]))
        raise InputError(f"Cannot read endowment profile {text!r}")

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind, "base": format_rational(self.base)}
        if self.kind == "hotspots":
            data.update(hot=format_rational(self.hot), count=self.count, hot_ids=list(self.hot_ids))
        return data


@dataclass(frozen=True)
class GenSpec:
    """
    Model and parameters of a generated instance.

    lattice(rows, cols) | er(n, p) | ba(n, m, power) | ws(n, k, beta)
    """

    model: str
    endowment: EndowmentProfile
    seed: int = 0
    require_connected: bool = True
    rows: int = 0
    cols: int = 0
    n: int = 0
    p: float = 0.0
    m: int = 1
    power: float = 1.0
    k: int = 2
    beta: float = 0.0
    draw: str = "constant"

    def __post_init__(self):
        if self.model not in MODELS:
            raise InputError(f"Unknown model {self.model!r}; expected one of {', '.join(MODELS)}")
        if self.draw not in DRAW_KINDS:
            raise InputError(f"Unknown draw law {self.draw!r}; expected one of {', '.join(DRAW_KINDS)}")
        if self.model == "lattice" and (self.rows < 1 or self.cols < 1):
            raise InputError(f"Lattice sides must be positive, got {self.rows}x{self.cols}")
        if self.size < 2:
            raise InputError(f"A generated instance needs at least two nodes, got {self.size}")
        if self.model == "er" and not (0 < self.p <= 1):
            raise InputError(f"Edge probability p must lie in (0, 1], got {self.p}")
        if self.model == "ba" and not (1 <= self.m < self.n):
            raise InputError(f"Attachment count m must satisfy 1 <= m < n, got m={self.m}")
        if self.model == "ba" and self.power < 0:
            raise InputError(f"Attachment power must be non-negative, got {self.power}")
        if self.model == "ws" and not (0 <= self.beta <= 1):
            raise InputError(f"Rewiring probability beta must lie in [0, 1], got {self.beta}")
        if self.model == "ws" and not (2 <= self.k < self.n):
            raise InputError(f"Ring degree k must satisfy 2 <= k < n, got k={self.k}")
        profile = self.endowment
        if profile.kind == "hotspots" and profile.count > self.size:
            raise InputError(f"{profile.count} hotspot(s) do not fit in {self.size} node(s)")

    @property
    def size(self) -> int:
        return self.rows * self.cols if self.model == "lattice" else self.n

    def to_dict(self) -> Dict[str, Any]:
        params = {
            "lattice": {"rows": self.rows, "cols": self.cols},
            "er": {"n": self.n, "p": self.p},
            "ba": {"n": self.n, "m": self.m, "power": self.power},
            "ws": {"n": self.n, "k": self.k, "beta": self.beta},
        }[self.model]
        return {
            "model": self.model,
            **params,
            "seed": self.seed,
            "require_connected": self.require_connected,
            "endowment": self.endowment.to_dict(),
            "draw": self.draw,
        }


class NetworkGenerator:
    """
    Builds (Graph, Endowments) pairs from a GenSpec.
    """

    def __init__(self, config: Dict[str, Any] = None):
        """
        Initialize the generator.

        Args:
            config: Application configuration; reads the 'generate' section
        """
        self.config = (config or {}).get("generate", {}) or {}
        self.max_retries = int(self.config.get("max_retries", MAX_RETRIES))
        self.logger = logging.getLogger(__name__)

    def generate(self, spec: GenSpec) -> Tuple[Graph, Endowments]:
        """
        Generate one instance.

        Args:
            spec: Model, parameters, seed and endowment profile

        Returns:
            (graph, endowments), identical for identical specs

        Raises:
            GenerationError: If no connected sample appeared within the retries
            InputError: If listed hotspot ids are not nodes of the graph
        """
        rng = np.random.default_rng(spec.seed)
        graph = None
        for attempt in range(1, self.max_retries + 1):
            sub_seed = int(rng.integers(2**32))
            candidate = self._sample(spec, sub_seed)
            if not spec.require_connected or nx.is_connected(candidate):
                graph = candidate
                break
            self.logger.debug(f"{spec.model} sample {attempt} is disconnected; resampling")
        if graph is None:
            raise GenerationError(
                f"No connected {spec.model} sample on {spec.size} node(s) after {self.max_retries} attempt(s)"
            )

        g = Graph(sorted(graph.nodes), [tuple(e) for e in graph.edges], require_connected=spec.require_connected)
        d = self._endowments(spec, g, rng)
        self.logger.info(f"✅ Generated {spec.model} instance: {len(g)} node(s), {len(g.edges)} edge(s)")
        return g, d

    def _sample(self, spec: GenSpec, seed: int) -> nx.Graph:
        if spec.model == "lattice":
            grid = nx.grid_2d_graph(spec.rows, spec.cols)
            return nx.relabel_nodes(grid, {(r, c): r * spec.cols + c + 1 for r, c in grid.nodes})
        if spec.model == "er":
            sample = nx.gnp_random_graph(spec.n, spec.p, seed=seed)
        elif spec.model == "ws":
            sample = nx.watts_strogatz_graph(spec.n, spec.k, spec.beta, seed=seed)
        else:
            sample = _preferential_attachment(spec.n, spec.m, spec.power, np.random.default_rng(seed))
        return nx.relabel_nodes(sample, {v: v + 1 for v in sample.nodes})

    def _endowments(self, spec: GenSpec, g: Graph, rng: np.random.Generator) -> Endowments:
        profile = spec.endowment
        means = {i: profile.base for i in g.node_ids}
        if profile.kind == "hotspots":
            if profile.hot_ids:
                unknown = sorted(set(profile.hot_ids) - set(g.node_ids))
                if unknown:
                    raise InputError(f"Listed hotspot id(s) {unknown} are not nodes of the graph")
                chosen = list(profile.hot_ids)
            else:
                chosen = [int(i) for i in rng.choice(np.array(g.node_ids), size=profile.count, replace=False)]
            for i in chosen:
                means[i] = profile.hot
            self.logger.debug(f"Hotspots at {sorted(chosen)}")
        laws = {i: DistributionSpec.around_mean(spec.draw, value) for i, value in means.items()}
        return Endowments.from_means(means, dists=laws)


def _preferential_attachment(n: int, m: int, power: float, rng: np.random.Generator) -> nx.Graph:
    """
    Grow a graph from a clique on m + 1 nodes; each new node links to m
    distinct existing nodes picked with probability ∝ degree^power.
    """
    graph = nx.complete_graph(m + 1)
    degrees = np.zeros(n)
    degrees[: m + 1] = m
    for v in range(m + 1, n):
        weights = degrees[:v] ** power
        targets = rng.choice(v, size=m, replace=False, p=weights / weights.sum())
        for u in sorted(int(u) for u in targets):
            graph.add_edge(v, u)
            degrees[u] += 1
        degrees[v] = m
    return graph


def spec_from_args(model: str, endowment: EndowmentProfile, seed: int, **params: Optional[Any]) -> GenSpec:
    """GenSpec from command-line values, skipping parameters left unset."""
    return GenSpec(model=model, endowment=endowment, seed=seed, **{k: v for k, v in params.items() if v is not None})
