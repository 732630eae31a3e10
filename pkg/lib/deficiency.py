"""
Deficiency sets via project-selection cuts.

For node weights w and the neighbourhood function f_R(S) = Σ_{j∈N_S} D_j of
the subgraph induced by R, one minimum cut gives

    min_{S ⊆ R} f_R(S) − w(S)

together with its inclusion-maximal minimiser. Every node appears twice in
the network: as a "select" vertex (source arc of capacity w_i) and as a
"resource" vertex (sink arc of capacity D_j); selecting i forces every
neighbour's resource into the closure through an unbounded arc.
"""

import logging
from fractions import Fraction
from typing import AbstractSet, FrozenSet, Mapping, Tuple

from .errors import InputError
from .flow import FlowNetwork, max_flow, min_cut_max_source
from .graph import Graph

logger = logging.getLogger(__name__)


def min_closure_gap(
    g: Graph,
    capacities: Mapping[int, Fraction],
    weights: Mapping[int, Fraction],
    restrict: AbstractSet[int],
) -> Tuple[Fraction, FrozenSet[int]]:
    """
    Minimise f_R(S) − w(S) over all S ⊆ R, the empty set included.

    Args:
        g: The graph
        capacities: Node endowments D_j
        weights: Non-negative node weights w_i
        restrict: The node set R (nonempty)

    Returns:
        (minimum value, maximal minimiser); the minimiser is empty when only
        ∅ attains the minimum
    """
    sub = g.induced_subgraph(restrict)
    members = sub.node_ids
    net = FlowNetwork("s", "t")
    for i in members:
        net.add_arc("s", ("select", i), weights[i])
    for i in members:
        for j in sorted(sub.neighbors(i)):
            net.add_arc(("select", i), ("resource", j), None)
    for j in members:
        net.add_arc(("resource", j), "t", capacities[j])

    result = max_flow(net)
    total_weight = sum((weights[i] for i in members), Fraction(0))
    value = result.value - total_weight
    side = min_cut_max_source(result)
    chosen = frozenset(i for i in members if ("select", i) in side)
    return value, chosen


def min_deficiency_set(
    g: Graph, d, lam: Fraction, restrict: AbstractSet[int]
) -> Tuple[Fraction, FrozenSet[int]]:
    """
    Nonempty maximal minimiser of f_R(S) − λ·D(S) over S ⊆ R.

    If the cut's maximal minimiser is empty (the minimum is 0 and only ∅
    attains it), the best singleton and its value are returned instead.

    Args:
        g: The graph
        d: Endowments
        lam: Positive rational λ
        restrict: Nonempty node set R

    Returns:
        (value, set)

    Raises:
        InputError: On an empty restriction or non-positive λ
    """
    if not restrict:
        raise InputError("min_deficiency_set needs a nonempty restriction")
    lam = Fraction(lam)
    if lam <= 0:
        raise InputError(f"λ must be positive, got {lam}")

    weights = {i: lam * d.means[i] for i in restrict}
    value, chosen = min_closure_gap(g, d.means, weights, restrict)
    if chosen:
        return value, chosen

    sub = g.induced_subgraph(restrict)
    best = None
    for i in sub.node_ids:
        gap = sum((d.means[j] for j in sub.neighbors(i)), Fraction(0)) - weights[i]
        if best is None or gap < best[0]:
            best = (gap, frozenset({i}))
    logger.debug(f"Empty maximal minimiser at λ={lam}; falling back to singleton {sorted(best[1])}")
    return best
