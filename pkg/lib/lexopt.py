"""
Lex-optimal Solver

Computes the unique lexicographically optimal sharing-ratio vector by
recursive peeling: on the residual node set Q, the minimum deficiency ratio
λ* = min f_Q(S)/D(S) and its maximal minimiser L give the lowest remaining
level; the neighbours of L inside Q sit at 1/λ*; both are removed and the
rest is solved again. A residual component with λ* >= 1 is balanced and all
its nodes get ratio 1.

The solver also certifies a decomposition against the tight-prefix
characterisation of the lex-optimal base and extracts one allocation d_ij
realising it through per-level-pair transportation problems.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, FrozenSet, List, Mapping, Tuple

from .deficiency import min_deficiency_set
from .endowments import Endowments
from .errors import ConsistencyError, InputError, StructuralError
from .flow import transportation
from .graph import Graph
from .polymatroid import BASE_ENUMERATION_CAP, base_separation, f_value, in_base
from .reports import CheckReport

ONE = Fraction(1)


@dataclass(frozen=True)
class LevelDecomposition:
    """
    Level values v_1 < ... < v_K, level sets L_1..L_K, and per-node ratio
    ρ_i and received rate r_i = ρ_i·D_i.
    """

    levels: Tuple[Fraction, ...]
    level_sets: Tuple[FrozenSet[int], ...]
    ratios: Mapping[int, Fraction]
    received: Mapping[int, Fraction]

    @classmethod
    def from_ratios(cls, ratios: Mapping[int, Fraction], d: Endowments) -> "LevelDecomposition":
        """Group nodes by equal ratio (ascending) and derive received rates."""
        values = sorted(set(ratios.values()))
        level_sets = tuple(frozenset(i for i, v in ratios.items() if v == value) for value in values)
        ordered = dict(sorted(ratios.items()))
        received = {i: v * d.means[i] for i, v in ordered.items()}
        return cls(tuple(values), level_sets, ordered, received)

    @property
    def K(self) -> int:
        return len(self.levels)

    def level_index(self, node: int) -> int:
        """0-based index k of the level holding `node`."""
        for k, members in enumerate(self.level_sets):
            if node in members:
                return k
        raise InputError(f"Node {node} is not in the decomposition")


@dataclass(frozen=True)
class Allocation:
    """Directed transfer rates d_ij, nonzero only on edges of the graph."""

    transfers: Mapping[Tuple[int, int], Fraction]

    def given(self, node: int) -> Fraction:
        return sum((v for (i, _), v in self.transfers.items() if i == node), Fraction(0))

    def received(self, node: int) -> Fraction:
        return sum((v for (_, j), v in self.transfers.items() if j == node), Fraction(0))


def lex_compare(x: Mapping[Any, Fraction], y: Mapping[Any, Fraction]) -> int:
    """
    Lexicographic order of the sorted vectors: 1 if x ≻ y, -1 if y ≻ x, 0 if equal.
    """
    for a, b in zip(sorted(x.values()), sorted(y.values())):
        if a != b:
            return 1 if a > b else -1
    return 0


def groups(dec: LevelDecomposition) -> List[FrozenSet[int]]:
    """Disjoint groups L_k ∪ L_{K−k+1}, plus the middle level when K is odd."""
    K = dec.K
    result = [dec.level_sets[k] | dec.level_sets[K - 1 - k] for k in range(K // 2)]
    if K % 2:
        result.append(dec.level_sets[K // 2])
    return result


def redundant_edges(g: Graph, dec: LevelDecomposition) -> List[Tuple[int, int]]:
    """
    Edges on which neither endpoint is a minimum-ratio neighbour of the other.

    No equilibrium transfer uses them, so removing them leaves the lex-optimal
    allocation unchanged.
    """
    rho = dec.ratios
    lowest = {i: min(rho[j] for j in g.neighbors(i)) for i in g.node_ids}
    return [(i, j) for (i, j) in g.sorted_edges() if rho[j] != lowest[i] and rho[i] != lowest[j]]


class LexOptSolver:
    """
    Exact solver for the lex-optimal sharing ratios.

    This class handles:
    - The minimum deficiency ratio (Dinkelbach iteration over min cuts)
    - Peeling the level structure
    - Certifying a decomposition
    - Extracting an allocation that realises it
    """

    def __init__(self, config: Dict[str, Any] = None):
        """
        Initialize the solver.

        Args:
            config: Application configuration; reads the 'solver' section
        """
        self.config = (config or {}).get("solver", {}) or {}
        self.base_cap = int(self.config.get("base_enumeration_cap", BASE_ENUMERATION_CAP))
        self.logger = logging.getLogger(__name__)

    def min_ratio(self, g: Graph, d: Endowments, restrict) -> Tuple[Fraction, FrozenSet[int]]:
        """
        λ* = min over nonempty S ⊆ R of f_R(S)/D(S) and its maximal minimiser.

        Dinkelbach: start from the best singleton ratio, then repeatedly take
        the maximal minimiser S of f_R(S) − λ·D(S) and set λ = f_R(S)/D(S)
        until the minimum is exactly 0.

        Args:
            g: The graph
            d: Endowments
            restrict: Nonempty node set R (f is taken in the induced subgraph)

        Returns:
            (λ*, L)

        Raises:
            StructuralError: If R holds a node with no neighbour in G_R
                (its deficiency ratio would be 0)
        """
        if not restrict:
            raise InputError("min_ratio needs a nonempty node set")
        sub = g.induced_subgraph(restrict)
        isolated = [i for i in sub.node_ids if not sub.neighbors(i)]
        if isolated:
            raise StructuralError(f"deficiency ratio 0: node(s) {isolated} have no neighbour in the residual graph")

        lam = min(f_value(sub, d, {i}) / d.means[i] for i in sub.node_ids)
        iterations = 0
        while True:
            iterations += 1
            value, chosen = min_deficiency_set(sub, d, lam, sub.node_ids)
            if value == 0:
                self.logger.debug(f"min_ratio on {len(sub)} node(s): λ*={lam} after {iterations} cut(s)")
                return lam, chosen
            if value > 0:
                raise ConsistencyError(f"Deficiency minimum {value} > 0 at an attained ratio λ={lam}")
            lam = f_value(sub, d, chosen) / d.total(chosen)

    def peel_solve(self, g: Graph, d: Endowments) -> LevelDecomposition:
        """
        Lex-optimal level decomposition of a connected graph.

        Each residual component is peeled independently; levels with equal
        values are merged at the end so v is strictly increasing.

        Raises:
            InputError: If the graph is disconnected, has fewer than two nodes,
                or the endowments do not match it
            StructuralError: Propagated from min_ratio
        """
        if len(g) < 2 or not g.is_connected():
            raise InputError("peel_solve needs a connected graph with at least two nodes")
        d.check_nodes(g.node_ids)

        ratios: Dict[int, Fraction] = {}
        pending = [frozenset(g.node_ids)]
        peels = 0
        while pending:
            q = pending.pop()
            for component in g.induced_subgraph(q).connected_components():
                lam, low = self.min_ratio(g, d, component)
                if lam >= 1:
                    for i in component:
                        ratios[i] = ONE
                    self.logger.debug(f"Balanced component of {len(component)} node(s) at ratio 1")
                    continue
                high = g.induced_subgraph(component).neighborhood(low)
                if low & high:
                    raise ConsistencyError("Lowest level is not independent in its residual graph")
                peels += 1
                for i in low:
                    ratios[i] = lam
                for i in high:
                    ratios[i] = 1 / lam
                self.logger.debug(f"Peel {peels}: {len(low)} node(s) at {lam}, {len(high)} at {1 / lam}")
                rest = component - low - high
                if rest:
                    pending.append(rest)

        dec = LevelDecomposition.from_ratios(ratios, d)
        self.logger.info(f"✅ Solved {len(g)} node(s): K={dec.K} level(s) after {peels} peel(s)")
        if dec.K > 1 and len(set(d.means.values())) == 1:
            self.logger.warning(f"Homogeneous endowments split into {dec.K} levels; the graph is not balanced")
        return dec

    def certify_lexopt(self, g: Graph, d: Endowments, dec: LevelDecomposition) -> CheckReport:
        """
        Tight-prefix certificate of lex-optimality.

        Checks r(L_1) = f(L_1) and r(L_k) = f(L_1..L_k) − f(L_1..L_{k−1})
        for every level, ρ_i·D_i = r_i for every node, and base membership
        (exhaustive up to the configured cap, min-cut separation above it).
        """
        report = CheckReport("lexopt-certificate")
        r = dec.received
        for i in g.node_ids:
            report.equality(f"received r_{i} = ρ_{i}·D_{i}", r[i], dec.ratios[i] * d.means[i])

        prefix: set = set()
        previous = Fraction(0)
        for k, members in enumerate(dec.level_sets, start=1):
            prefix |= members
            current = f_value(g, d, prefix)
            lhs = sum((r[i] for i in members), Fraction(0))
            label = f"Σ_L{k} r = f(L1..L{k})" + (f" − f(L1..L{k - 1})" if k > 1 else "")
            report.equality(label, lhs, current - previous)
            previous = current

        if len(g) <= self.base_cap:
            report.notes["base_oracle"] = "enumeration"
            report.record("r in base", in_base(g, d, r, cap=self.base_cap))
        else:
            report.notes["base_oracle"] = "min-cut"
            member, gap, witness = base_separation(g, d, r)
            report.record("r in base", member, gap=gap, witness=witness)

        if report.passed:
            self.logger.info(f"✅ Certified lex-optimal decomposition (K={dec.K})")
        else:
            self.logger.warning(f"Certification failed on {len(report.failures)} check(s)")
        return report

    def extract_allocation(self, g: Graph, d: Endowments, dec: LevelDecomposition) -> Allocation:
        """
        One allocation d_ij realising the decomposition.

        Each paired level exchanges with its partner only: L_{K−k+1} feeds the
        demands r_i of L_k, L_k feeds the demands of L_{K−k+1}; an odd middle
        level circulates its own endowments along its internal edges.

        Raises:
            ConsistencyError: If a transportation problem is infeasible (the
                decomposition was not lex-optimal)
        """
        K = dec.K
        transfers: Dict[Tuple[int, int], Fraction] = {}
        for k in range(K // 2):
            low, high = dec.level_sets[k], dec.level_sets[K - 1 - k]
            transfers.update(self._ship(g, d, dec, high, low, f"L{K - k} -> L{k + 1}"))
            transfers.update(self._ship(g, d, dec, low, high, f"L{k + 1} -> L{K - k}"))
        if K % 2:
            middle = dec.level_sets[K // 2]
            transfers.update(self._ship(g, d, dec, middle, middle, f"L{K // 2 + 1} circulation"))

        self.logger.info(f"✅ Extracted allocation with {len(transfers)} positive transfer(s)")
        return Allocation(dict(sorted(transfers.items())))

    def _ship(self, g: Graph, d: Endowments, dec: LevelDecomposition, givers, takers, label: str):
        lanes = [(i, j) for i in sorted(givers) for j in sorted(g.neighbors(i)) if j in takers]
        supplies = {i: d.means[i] for i in givers}
        demands = {j: dec.received[j] for j in takers}
        try:
            plan = transportation(supplies, demands, lanes)
        except InputError as e:
            raise ConsistencyError(f"Transportation {label} is unbalanced: {e}")
        if plan is None:
            raise ConsistencyError(f"Transportation {label} is infeasible on a certified decomposition")
        return plan

