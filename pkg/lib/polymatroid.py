"""
Polymatroid of achievable received rates.

f(S) = Σ_{j∈N_S} D_j is the most resource a node set S can ever receive.
It is submodular with f(∅) = 0, so {r ≥ 0 : r(S) ≤ f(S)} is a polymatroid
and its face r(N) = f(N) (the base) is exactly the region of long-run
received-rate vectors reachable by policies that hand out everything.

Small instances are checked by exhaustive subset tables built with numpy on
exact integers (every value scaled by a common denominator); large ones go
through the min-cut separation oracle in `deficiency`.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import AbstractSet, Dict, FrozenSet, List, Mapping, Sequence, Tuple

import numpy as np

from .deficiency import min_closure_gap
from .endowments import Endowments
from .errors import CapacityError, InputError
from .graph import Graph

logger = logging.getLogger(__name__)

BASE_ENUMERATION_CAP = 24
SUBMODULAR_EXHAUSTIVE_LIMIT = 10


@dataclass
class SubmodularityReport:
    """Outcome of a submodularity check; `violations` must stay empty."""

    pairs_checked: int = 0
    exhaustive: bool = False
    violations: List[Tuple[FrozenSet[int], FrozenSet[int]]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def f_value(g: Graph, d: Endowments, s: AbstractSet[int]) -> Fraction:
    """
    f(S), the total endowment of the neighbourhood of S.

    Args:
        g: The graph (pass an induced subgraph to evaluate f restricted to it)
        d: Endowments
        s: Node set

    Returns:
        Exact Σ_{j∈N_S} D_j; 0 for the empty set
    """
    return d.total(g.neighborhood(s))


def _scale(values: Sequence[Fraction]) -> int:
    scale = 1
    for value in values:
        scale = math.lcm(scale, Fraction(value).denominator)
    return scale


def _doubling(n: int, contributions: Sequence, combine, dtype) -> np.ndarray:
    """Table over all 2^n subset masks built one node (bit) at a time."""
    table = np.zeros(1, dtype=dtype)
    for k in range(n):
        table = np.concatenate([table, combine(table, contributions[k])])
    return table


def subset_tables(
    g: Graph, d: Endowments, r: Mapping[int, Fraction] = None
) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    Exact integer tables of f(S) and r(S) over every subset mask.

    Bit k of a mask stands for the k-th smallest node id. Both tables are
    multiplied by the returned common scale.

    Returns:
        (f table, r table (zeros when r is None), scale)
    """
    n = len(g)
    ids = g.node_ids
    rates = [Fraction(0)] * n if r is None else [Fraction(r[i]) for i in ids]
    means = [d.means[i] for i in ids]
    scale = _scale(means + rates)
    d_int = [int(v * scale) for v in means]
    r_int = [int(v * scale) for v in rates]
    big = sum(d_int) + sum(r_int) < 2**62
    dtype = np.int64 if big else object

    neighbour_masks = []
    for i in ids:
        mask = 0
        for j in g.neighbors(i):
            mask |= 1 << g.index(j)
        neighbour_masks.append(mask)

    hood = _doubling(n, neighbour_masks, lambda t, m: t | m, np.int64)
    d_table = _doubling(n, d_int, lambda t, v: t + v, dtype)
    r_table = _doubling(n, r_int, lambda t, v: t + v, dtype)
    return d_table[hood], r_table, scale


def check_submodular(
    g: Graph, d: Endowments, trials: int, seed: int, exhaustive_limit: int = SUBMODULAR_EXHAUSTIVE_LIMIT
) -> SubmodularityReport:
    """
    Test f(S∩T) + f(S∪T) <= f(S) + f(T) exactly.

    Samples `trials` random pairs; for graphs with at most `exhaustive_limit`
    nodes every pair of subsets is checked as well.

    Args:
        g: The graph
        d: Endowments
        trials: Number of sampled pairs (>= 1)
        seed: Seed of the pair sampler

    Returns:
        SubmodularityReport listing any violating pair
    """
    if trials < 1:
        raise InputError("check_submodular needs at least one trial")
    report = SubmodularityReport()
    ids = g.node_ids
    n = len(ids)
    rng = np.random.default_rng(seed)

    for _ in range(trials):
        s = frozenset(i for i, keep in zip(ids, rng.random(n) < 0.5) if keep)
        t = frozenset(i for i, keep in zip(ids, rng.random(n) < 0.5) if keep)
        lhs = f_value(g, d, s & t) + f_value(g, d, s | t)
        if lhs > f_value(g, d, s) + f_value(g, d, t):
            report.violations.append((s, t))
        report.pairs_checked += 1

    if n <= exhaustive_limit:
        report.exhaustive = True
        f_table, _, _ = subset_tables(g, d)
        masks = np.arange(2**n, dtype=np.int64)
        for a in range(2**n):
            bad = f_table[a & masks] + f_table[a | masks] > f_table[a] + f_table
            report.pairs_checked += len(masks)
            for b in np.nonzero(bad)[0]:
                report.violations.append((_mask_to_set(g, a), _mask_to_set(g, int(b))))

    if report.violations:
        logger.error(f"Submodularity violated on {len(report.violations)} pair(s)")
    else:
        logger.debug(f"Submodularity held on {report.pairs_checked} pair(s)")
    return report


def _mask_to_set(g: Graph, mask: int) -> FrozenSet[int]:
    return frozenset(i for k, i in enumerate(g.node_ids) if mask >> k & 1)


def in_base(g: Graph, d: Endowments, r: Mapping[int, Fraction], cap: int = BASE_ENUMERATION_CAP) -> bool:
    """
    Exhaustive membership test for the base A_0.

    Checks r >= 0, r(S) <= f(S) for all 2^N − 2 proper subsets and
    r(N) = f(N), in exact arithmetic.

    Raises:
        CapacityError: Above `cap` nodes; use base_separation instead
        InputError: If r is not indexed by the graph's nodes
    """
    _check_rates(g, r)
    if len(g) > cap:
        raise CapacityError(
            f"in_base enumerates 2^{len(g)} subsets (cap {cap}); use base_separation, "
            "the min-cut check of min_S f(S) − r(S)"
        )
    if any(r[i] < 0 for i in g.node_ids):
        return False
    if sum((r[i] for i in g.node_ids), Fraction(0)) != f_value(g, d, g.node_ids):
        return False
    f_table, r_table, _ = subset_tables(g, d, r)
    return bool(np.all(f_table >= r_table))


def base_separation(g: Graph, d: Endowments, r: Mapping[int, Fraction]) -> Tuple[bool, Fraction, FrozenSet[int]]:
    """
    Polynomial membership test for the base via one minimum cut.

    Returns:
        (member, min_S f(S) − r(S), maximal minimiser); the set is a most
        violated constraint when the gap is negative
    """
    _check_rates(g, r)
    if any(r[i] < 0 for i in g.node_ids):
        negative = frozenset(i for i in g.node_ids if r[i] < 0)
        return False, min(r[i] for i in negative), negative
    gap, witness = min_closure_gap(g, d.means, {i: Fraction(r[i]) for i in g.node_ids}, frozenset(g.node_ids))
    total_ok = sum((r[i] for i in g.node_ids), Fraction(0)) == f_value(g, d, g.node_ids)
    return gap >= 0 and total_ok, gap, witness


def extreme_point(g: Graph, d: Endowments, sigma: Sequence[int]) -> Dict[int, Fraction]:
    """
    Marginal vector of a permutation: r_{σ(k)} = f(S_k) − f(S_{k−1}).

    Nodes earlier in σ "give always their generated resource" to the prefix;
    the result is a vertex of the base.

    Raises:
        InputError: If sigma is not a permutation of the node ids
    """
    if len(sigma) != len(g) or set(sigma) != set(g.node_ids):
        raise InputError("sigma must be a permutation of the node ids")
    rates = {}
    prefix = set()
    previous = Fraction(0)
    for node in sigma:
        prefix.add(node)
        current = f_value(g, d, prefix)
        rates[node] = current - previous
        previous = current
    return dict(sorted(rates.items()))


def all_extreme_points(g: Graph, d: Endowments) -> List[Dict[int, Fraction]]:
    """Distinct extreme points over every permutation (small graphs only)."""
    seen = {}
    for sigma in itertools.permutations(g.node_ids):
        point = extreme_point(g, d, sigma)
        seen.setdefault(tuple(point.values()), point)
    return list(seen.values())


def _check_rates(g: Graph, r: Mapping[int, Fraction]) -> None:
    if set(r) != set(g.node_ids):
        raise InputError("Rate vector must be indexed by exactly the graph's nodes")
