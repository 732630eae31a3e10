"""
Equilibrium Verifier

Independent checks of a solved instance under the three operating
frameworks:

- level structure of the lex-optimal vector (paired levels, independence,
  reciprocal values, balanced middle level)
- sharing-equilibrium conditions of an allocation (full distribution,
  r_i = D_i·ρ_i, transfers only to minimum-ratio neighbours)
- coalitional stability: no node subset can reallocate internally so that
  every member gets at least r*_i and one member strictly more

Coalition feasibility is decided with lower-bounded flows; strict
improvement with residual augmenting paths, one search per member.
"""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Iterator, Mapping, Optional

import numpy as np

from .deficiency import min_closure_gap
from .endowments import Endowments
from .errors import CapacityError, InputError
from .flow import FlowNetwork, augmenting_path, feasible_flow_lower_bounds, push_along
from .graph import Graph
from .lexopt import Allocation, LevelDecomposition
from .reports import CheckReport, _jsonable

EXHAUSTIVE_CAP = 16
DEFAULT_BUDGET = 2000


@dataclass(frozen=True)
class BlockingCoalition:
    """A coalition and an internal allocation's received rates that beat r*."""

    coalition: FrozenSet[int]
    improving_rates: Mapping[int, Fraction]


@dataclass
class StabilityReport:
    """
    Result of a blocking-coalition search.

    In sampled mode a missing witness only means none was found within the
    budget; it is not a proof of stability.
    """

    mode: str
    checked_coalitions: int = 0
    blocking: Optional[BlockingCoalition] = None
    strict_all: bool = False

    @property
    def passed(self) -> bool:
        return self.blocking is None

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "name": "weak-stability" if self.strict_all else "strong-stability",
            "mode": self.mode,
            "checked_coalitions": self.checked_coalitions,
            "passed": self.passed,
            "blocking": None,
        }
        if self.blocking is not None:
            data["blocking"] = {
                "coalition": sorted(self.blocking.coalition),
                "improving_rates": _jsonable(dict(self.blocking.improving_rates)),
            }
        return data


class EquilibriumVerifier:
    """
    Verifier for level structure, sharing equilibria and coalitional stability.
    """

    def __init__(self, config: Dict[str, Any] = None):
        """
        Initialize the verifier.

        Args:
            config: Application configuration; reads the 'verify' section
        """
        self.config = (config or {}).get("verify", {}) or {}
        self.exhaustive_cap = int(self.config.get("exhaustive_cap", EXHAUSTIVE_CAP))
        self.budget = int(self.config.get("budget", DEFAULT_BUDGET))
        self.logger = logging.getLogger(__name__)

    def check_structure(self, g: Graph, d: Endowments, dec: LevelDecomposition) -> CheckReport:
        """
        Check the level structure of a decomposition.

        Rebuilds Q_k = N − ∪_{m<k}(L_m ∪ L_{K−m+1}) and checks, for every
        k <= ⌊K/2⌋: L_k independent in G_{Q_k}; L_{K−k+1} = N_{Q_k}(L_k);
        v_k·v_{K−k+1} = 1; Σ_{L_k} r = Σ_{L_{K−k+1}} D. Also checks the odd
        middle level is 1 and the bounds v_1 = 1 (K = 1) or v_1 < 1 < v_K.
        """
        report = CheckReport("structure")
        K = dec.K
        covered = frozenset().union(*dec.level_sets) if dec.level_sets else frozenset()
        disjoint = sum(len(s) for s in dec.level_sets) == len(covered)
        report.record("level sets partition N", disjoint and covered == frozenset(g.node_ids))
        report.record("levels strictly increasing", K >= 1 and all(a < b for a, b in zip(dec.levels, dec.levels[1:])))
        consistent = all(dec.ratios.get(i) == dec.levels[k] for k, members in enumerate(dec.level_sets) for i in members)
        report.record("ratios match level values", consistent)
        if not report.passed:
            return report

        removed: FrozenSet[int] = frozenset()
        for k in range(K // 2):
            low, high = dec.level_sets[k], dec.level_sets[K - 1 - k]
            q = frozenset(g.node_ids) - removed
            sub = g.induced_subgraph(q)
            tag = f"k={k + 1}"
            report.record(f"L{k + 1} independent in G_Q{k + 1}", sub.is_independent(low), level=tag)
            hood = sub.neighborhood(low)
            report.record(f"L{K - k} = N_Q{k + 1}(L{k + 1})", hood == high, expected=high, found=hood)
            report.equality(f"v{k + 1}·v{K - k} = 1", dec.levels[k] * dec.levels[K - 1 - k], Fraction(1))
            report.equality(
                f"Σ_L{k + 1} r = Σ_L{K - k} D",
                sum((dec.received[i] for i in low), Fraction(0)),
                d.total(high),
            )
            removed = removed | low | high

        if K % 2:
            report.equality(f"middle level v{K // 2 + 1} = 1", dec.levels[K // 2], Fraction(1))
        if K == 1:
            report.equality("K = 1 gives v1 = 1", dec.levels[0], Fraction(1))
        else:
            report.record("v1 < 1 < vK", dec.levels[0] < 1 < dec.levels[-1], v1=dec.levels[0], vK=dec.levels[-1])

        self._log(report)
        return report

    def check_sharing_equilibrium(
        self, g: Graph, d: Endowments, alloc: Allocation, dec: LevelDecomposition
    ) -> CheckReport:
        """
        Check the stationary sharing-equilibrium conditions of an allocation.

        (a) Σ_j d_ij = D_i; (b) received_i = D_i·ρ_i; (c) every positive d_ij
        goes to a neighbour j of minimum ratio among N_i.
        """
        report = CheckReport("sharing-equilibrium")
        rho = dec.ratios
        for (i, j), amount in sorted(alloc.transfers.items()):
            if (min(i, j), max(i, j)) not in g.edges or amount < 0:
                report.record(f"d_{i}{j} on an edge and non-negative", False, amount=amount)
        for i in g.node_ids:
            report.equality(f"node {i} distributes D_{i}", alloc.given(i), d.means[i])
            report.equality(f"node {i} receives D_{i}·ρ_{i}", alloc.received(i), d.means[i] * rho[i])
        for (i, j), amount in sorted(alloc.transfers.items()):
            if amount > 0 and i in g and j in g:
                lowest = min(rho[k] for k in g.neighbors(i))
                report.record(f"d_{i}->{j} goes to a minimum-ratio neighbour", rho[j] == lowest, rho=rho[j], lowest=lowest)
        self._log(report)
        return report

    def find_blocking_coalition(
        self,
        g: Graph,
        d: Endowments,
        dec: LevelDecomposition,
        mode: str = "exhaustive",
        budget: Optional[int] = None,
        seed: int = 0,
        strict_all: bool = False,
    ) -> StabilityReport:
        """
        Search for a coalition that can do better on its own.

        Args:
            g: The graph
            d: Endowments
            dec: Decomposition whose received rates r* are tested
            mode: "exhaustive" (all nonempty subsets) or "sampled"
            budget: Number of sampled coalitions (sampled mode)
            seed: Seed of the coalition sampler
            strict_all: Look for coalitions improving every member strictly
                (weak stability) instead of the default strong notion

        Returns:
            StabilityReport with the first blocking coalition found, if any

        Raises:
            CapacityError: Exhaustive mode above the configured size cap
            InputError: Unknown mode
        """
        if mode not in ("exhaustive", "sampled"):
            raise InputError(f"Unknown stability mode: {mode!r}")
        if mode == "exhaustive" and len(g) > self.exhaustive_cap:
            raise CapacityError(
                f"Exhaustive coalition search over {len(g)} nodes exceeds the cap of {self.exhaustive_cap}; "
                "use sampled mode"
            )
        budget = self.budget if budget is None else int(budget)
        target = dec.received
        report = StabilityReport(mode=mode, strict_all=strict_all)
        candidates = self._exhaustive(g) if mode == "exhaustive" else self._sampled(g, budget, seed)

        for coalition in candidates:
            report.checked_coalitions += 1
            if strict_all:
                witness = self._weakly_blocks(g, d, coalition, target)
            else:
                witness = self._blocks(g, d, coalition, target)
            if witness is not None:
                report.blocking = BlockingCoalition(coalition, witness)
                self.logger.warning(f"Blocking coalition found: {sorted(coalition)}")
                return report

        if mode == "sampled":
            self.logger.info(f"No blocking coalition in a budget of {report.checked_coalitions} (sampled, not a proof)")
        else:
            self.logger.info(f"✅ No blocking coalition among {report.checked_coalitions} coalition(s)")
        return report

    def _exhaustive(self, g: Graph) -> Iterator[FrozenSet[int]]:
        for size in range(1, len(g) + 1):
            for members in itertools.combinations(g.node_ids, size):
                yield frozenset(members)

    def _sampled(self, g: Graph, budget: int, seed: int) -> Iterator[FrozenSet[int]]:
        rng = np.random.default_rng(seed)
        produced = 0
        while produced < budget:
            picks = rng.random(len(g)) < 0.5
            members = frozenset(i for i, keep in zip(g.node_ids, picks) if keep)
            if members:
                produced += 1
                yield members

    def _blocks(
        self, g: Graph, d: Endowments, coalition: FrozenSet[int], target: Mapping[int, Fraction]
    ) -> Optional[Dict[int, Fraction]]:
        net, sink_arcs = _coalition_network(g, d, coalition, target)
        result = feasible_flow_lower_bounds(net)
        if not result.feasible:
            return None
        flow = result.flow
        rates = {j: flow[k] for j, k in sink_arcs.items()}
        if any(rates[j] > target[j] for j in coalition):
            return rates
        for j in sorted(coalition):
            steps = augmenting_path(net, flow, net.source, ("take", j))
            if steps:
                _, delta = push_along(net, flow, steps)
                rates[j] += delta
                return rates
        return None

    def _weakly_blocks(
        self, g: Graph, d: Endowments, coalition: FrozenSet[int], target: Mapping[int, Fraction]
    ) -> Optional[Dict[int, Fraction]]:
        # largest uniform raise ε* = min over nonempty T of (f_S(T) − r*(T)) / |T|
        sub = g.induced_subgraph(coalition)
        eps = min(d.total(sub.neighbors(i)) - target[i] for i in sub.node_ids)
        while eps > 0:
            weights = {i: target[i] + eps for i in coalition}
            value, tight = min_closure_gap(g, d.means, weights, coalition)
            if value == 0:
                break
            eps = (d.total(sub.neighborhood(tight)) - sum((target[i] for i in tight), Fraction(0))) / len(tight)
        if eps <= 0:
            return None
        return {i: target[i] + eps / 2 for i in sorted(coalition)}

    def _log(self, report: CheckReport) -> None:
        if report.passed:
            self.logger.info(f"✅ {report.name}: {len(report.items)} check(s) passed")
        else:
            self.logger.warning(f"{report.name}: {len(report.failures)} of {len(report.items)} check(s) failed")


def _coalition_network(g: Graph, d: Endowments, coalition: FrozenSet[int], target: Mapping[int, Fraction]):
    """Transfer network on G_S: source -> i (cap D_i), i -> j per edge, j -> sink (lower r*_j)."""
    sub = g.induced_subgraph(coalition)
    net = FlowNetwork("source", "sink")
    for i in sub.node_ids:
        net.add_arc("source", ("give", i), d.means[i])
    for i in sub.node_ids:
        for j in sorted(sub.neighbors(i)):
            net.add_arc(("give", i), ("take", j), None)
    sink_arcs = {j: net.add_arc(("take", j), "sink", None, target[j]) for j in sub.node_ids}
    return net, sink_arcs
