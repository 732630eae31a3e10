"""
Sharing Dynamics Simulator

Slot-by-slot simulation of the minimum-ratio sharing policy: at the start of
every slot each node announces its sharing ratio ρ_i(t) = R̄_i(t) / D̃_i, then
every node hands its whole draw D_i(t) to the neighbour(s) announcing the
smallest ratio. Rounds are synchronous and all ratios start at 0.

The simulation runs in numpy floats. The deterministic pieces used to
reason about it (the expected-step map J, the Lyapunov function and the
level sets of a ratio vector) are exact.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy.stats as stats

from .endowments import Endowments
from .errors import InputError
from .graph import Graph

logger = logging.getLogger(__name__)

ESTIMATORS = ("exact", "running", "discounted")
TIE_BREAKS = ("split", "lowest", "random")
TOLERANCE_BANDS = (0.1, 0.05, 0.01)

# relative slack under which two announced float ratios count as tied
TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SimConfig:
    """
    Simulation settings.

    estimator:
        exact       divide by the true mean D_i
        running     divide by the running average of node i's own draws
        discounted  divide by D̂_i(t) = (1−α)·D_i(t) + α·D̂_i(t−1), D̂_i(1) = D_i(1)
    tie_break:
        split       share the draw equally among tied neighbours
        lowest      send everything to the tied neighbour with the lowest id
        random      send everything to one tied neighbour chosen at random
    """

    steps: int = 2000
    estimator: str = "exact"
    alpha: float = 0.99
    tie_break: str = "split"
    seed: int = 0
    record_every: int = 1

    def __post_init__(self):
        if int(self.steps) < 1:
            raise InputError(f"Simulation needs at least one slot, got steps={self.steps}")
        if self.estimator not in ESTIMATORS:
            raise InputError(f"Unknown estimator {self.estimator!r}; expected one of {', '.join(ESTIMATORS)}")
        if self.estimator == "discounted" and not (0 < float(self.alpha) < 1):
            raise InputError(f"Discount factor alpha must lie strictly inside (0, 1), got {self.alpha}")
        if self.tie_break not in TIE_BREAKS:
            raise InputError(f"Unknown tie-break {self.tie_break!r}; expected one of {', '.join(TIE_BREAKS)}")
        if int(self.record_every) < 1:
            raise InputError(f"record_every must be at least 1, got {self.record_every}")

    @classmethod
    def from_config(cls, config: Dict[str, Any] = None, **overrides: Any) -> "SimConfig":
        """
        Read the 'simulation' section, then apply non-None overrides.

        Args:
            config: Application configuration
            **overrides: Field values from the command line

        Returns:
            Validated SimConfig
        """
        section = (config or {}).get("simulation", {}) or {}
        known = {k: section[k] for k in cls.__dataclass_fields__ if k in section}
        known.update({k: v for k, v in overrides.items() if v is not None})
        for key in ("steps", "seed", "record_every"):
            if key in known:
                known[key] = int(known[key])
        if "alpha" in known:
            known["alpha"] = float(known["alpha"])
        return cls(**known)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "steps": self.steps,
            "estimator": self.estimator,
            "alpha": self.alpha,
            "tie_break": self.tie_break,
            "seed": self.seed,
            "record_every": self.record_every,
        }


@dataclass
class SimState:
    """State after `t` completed slots; arrays follow the sorted node order."""

    t: int
    r_bar: np.ndarray
    rho: np.ndarray
    estimate: np.ndarray
    draw_sum: np.ndarray

    @classmethod
    def initial(cls, n: int) -> "SimState":
        zeros = np.zeros(n)
        return cls(0, zeros.copy(), zeros.copy(), zeros.copy(), zeros.copy())


@dataclass(frozen=True)
class SimRecord:
    t: int
    r_bar: Tuple[float, ...]
    rho: Tuple[float, ...]
    estimate: Tuple[float, ...]
    V: Optional[float] = None


@dataclass
class SimTrace:
    """Recorded slots of one run."""

    node_ids: Tuple[int, ...]
    means: Tuple[float, ...]
    records: List[SimRecord] = field(default_factory=list)
    config: Optional[SimConfig] = None

    def final(self) -> SimRecord:
        return self.records[-1]


class SharingSimulator:
    """
    Runs the minimum-ratio sharing policy on one instance.

    All randomness (draws and random tie-breaks) comes from one numpy
    generator seeded with `cfg.seed`, consumed in sorted node order, so a
    run is reproducible bit for bit.
    """

    def __init__(
        self, g: Graph, d: Endowments, cfg: SimConfig, reference: Optional[Mapping[int, Fraction]] = None
    ):
        """
        Initialize the simulator.

        Args:
            g: Connected graph
            d: Endowments with per-node draw laws
            cfg: Simulation settings
            reference: Lex-optimal received rates r*; enables the V column
        """
        d.check_nodes(g.node_ids)
        self.g = g
        self.d = d
        self.cfg = cfg
        self.logger = logging.getLogger(__name__)
        self.node_ids = g.node_ids
        self.means = np.array([float(d.means[i]) for i in self.node_ids])
        self.bounds = np.array([float(d.dists[i].bound) for i in self.node_ids])
        self._neighbours = [np.array(sorted(g.index(j) for j in g.neighbors(i)), dtype=np.int64) for i in self.node_ids]
        self.reference = None
        if reference is not None:
            if set(reference) != set(self.node_ids):
                raise InputError("Reference rates must be indexed by exactly the graph's nodes")
            self.reference = np.array([float(reference[i]) for i in self.node_ids])
        self.rng = np.random.default_rng(cfg.seed)

    def step(self, state: SimState, draws: Mapping[int, float]) -> SimState:
        """
        Advance one slot with the given draws.

        Args:
            state: State before the slot
            draws: node id -> amount generated this slot

        Returns:
            The state after the slot

        Raises:
            InputError: If a draw is negative, exceeds the node's bound, or
                the draws are not indexed by the graph's nodes
        """
        if set(draws) != set(self.node_ids):
            raise InputError("Draws must be indexed by exactly the graph's nodes")
        amounts = np.array([float(draws[i]) for i in self.node_ids])
        bad = np.nonzero((amounts < 0) | (amounts > self.bounds))[0]
        if len(bad):
            node = self.node_ids[int(bad[0])]
            raise InputError(f"Draw {amounts[bad[0]]} of node {node} is outside [0, {self.bounds[bad[0]]}]")
        return self._advance(state, amounts)

    def run(self) -> SimTrace:
        """
        Simulate `cfg.steps` slots from the all-zero state.

        Returns:
            SimTrace with a record every `record_every` slots and at the last slot
        """
        cfg = self.cfg
        trace = SimTrace(self.node_ids, tuple(float(m) for m in self.means), config=cfg)
        state = SimState.initial(len(self.node_ids))
        laws = [self.d.dists[i] for i in self.node_ids]
        for _ in range(cfg.steps):
            amounts = np.array([law.sample(self.rng) for law in laws])
            state = self._advance(state, amounts)
            if state.t % cfg.record_every == 0 or state.t == cfg.steps:
                trace.records.append(self._record(state))
        self.logger.info(
            f"✅ Simulated {cfg.steps} slot(s) on {len(self.node_ids)} node(s) "
            f"({cfg.estimator} estimator, {cfg.tie_break} ties), {len(trace.records)} record(s)"
        )
        return trace

    def _advance(self, state: SimState, amounts: np.ndarray) -> SimState:
        received = self._transfer(state.rho, amounts)
        t = state.t + 1
        r_bar = state.r_bar + (received - state.r_bar) / t
        draw_sum = state.draw_sum + amounts

        if self.cfg.estimator == "exact":
            estimate = self.means.copy()
        elif self.cfg.estimator == "running":
            estimate = draw_sum / t
        elif t == 1:
            estimate = amounts.copy()
        else:
            alpha = self.cfg.alpha
            estimate = (1 - alpha) * amounts + alpha * state.estimate

        rho = np.zeros_like(r_bar)
        positive = estimate > 0
        rho[positive] = r_bar[positive] / estimate[positive]
        return SimState(t, r_bar, rho, estimate, draw_sum)

    def _transfer(self, rho: np.ndarray, amounts: np.ndarray) -> np.ndarray:
        received = np.zeros_like(amounts)
        for k, nbrs in enumerate(self._neighbours):
            if amounts[k] == 0 or len(nbrs) == 0:
                continue
            values = rho[nbrs]
            lowest = values.min()
            tied = nbrs[values <= lowest + TIE_TOLERANCE * max(1.0, abs(lowest))]
            if self.cfg.tie_break == "split":
                received[tied] += amounts[k] / len(tied)
            elif self.cfg.tie_break == "lowest":
                received[tied[0]] += amounts[k]
            else:
                received[tied[self.rng.integers(len(tied))]] += amounts[k]
        return received

    def _record(self, state: SimState) -> SimRecord:
        v = None
        if self.reference is not None:
            v = float(0.5 * np.sum((state.r_bar - self.reference) ** 2 / self.means))
        return SimRecord(
            state.t,
            tuple(state.r_bar.tolist()),
            tuple(state.rho.tolist()),
            tuple(state.estimate.tolist()),
            v,
        )


def expected_step(g: Graph, d: Endowments, rho: Mapping[int, Fraction]) -> Dict[int, Fraction]:
    """
    Expected received amount J_i of one slot under split tie-breaking.

    Every node j hands D_j to the neighbours of minimum ratio in N_j, split
    equally among them; J_i collects those shares.

    Args:
        g: The graph
        d: Endowments
        rho: Exact announced ratios

    Returns:
        node id -> J_i, exact
    """
    if set(rho) != set(g.node_ids):
        raise InputError("Ratios must be indexed by exactly the graph's nodes")
    result = {i: Fraction(0) for i in g.node_ids}
    for j in g.node_ids:
        nbrs = g.neighbors(j)
        if not nbrs:
            continue
        lowest = min(rho[i] for i in nbrs)
        tied = [i for i in nbrs if rho[i] == lowest]
        for i in tied:
            result[i] += d.means[j] / len(tied)
    return result


def level_sets(rho: Mapping[int, Any]) -> List[FrozenSet[int]]:
    """Nodes grouped by equal ratio, lowest ratio first."""
    values = sorted(set(rho.values()))
    return [frozenset(i for i, v in rho.items() if v == value) for value in values]


def lyapunov(rbar: Mapping[int, Any], rstar: Mapping[int, Any], d: Endowments):
    """
    V(x) = ½ Σ_i (x_i − r*_i)² / D_i.

    Exact when both vectors are rational, a float otherwise.
    """
    if set(rbar) != set(rstar) or set(rbar) != set(d.means):
        raise InputError("lyapunov needs vectors over the same node set as the endowments")
    total = sum((rbar[i] - rstar[i]) ** 2 / d.means[i] for i in sorted(rbar))
    return total / 2


@dataclass
class Checkpoint:
    t: int
    max_error: float
    V: float


@dataclass
class ConvergenceReport:
    """
    Distance to the lex-optimal ratios over a trace.

    `band_entry[b]` is the first recorded slot with ‖ρ − ρ*‖∞ <= b (None if
    never). `trend` is the rank correlation of V against t: negative while V
    decreases, 0.0 when V is constant.
    """

    checkpoints: List[Checkpoint]
    band_entry: Dict[float, Optional[int]]
    trend: float

    @property
    def final(self) -> Checkpoint:
        return self.checkpoints[-1]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "final_t": self.final.t,
            "final_max_error": self.final.max_error,
            "final_V": self.final.V,
            "band_entry": {str(b): t for b, t in self.band_entry.items()},
            "trend": self.trend,
            "checkpoints": [{"t": c.t, "max_error": c.max_error, "V": c.V} for c in self.checkpoints],
        }


def convergence_report(
    trace: SimTrace, rstar: Mapping[int, Any], bands: Sequence[float] = TOLERANCE_BANDS
) -> ConvergenceReport:
    """
    Summarise how a run approaches the lex-optimal rates.

    Args:
        trace: A recorded run (the node means come from the trace)
        rstar: Lex-optimal received rates r*
        bands: Tolerance bands on ‖ρ(t) − ρ*‖∞

    Returns:
        ConvergenceReport

    Raises:
        InputError: On an empty trace or mismatched node sets
    """
    if not trace.records:
        raise InputError("Cannot report on an empty trace")
    if set(rstar) != set(trace.node_ids):
        raise InputError("Reference rates must cover exactly the traced nodes")
    means = np.array(trace.means)
    target = np.array([float(rstar[i]) for i in trace.node_ids])
    rho_star = target / means

    checkpoints = []
    band_entry: Dict[float, Optional[int]] = {float(b): None for b in bands}
    for record in trace.records:
        rho = np.array(record.rho)
        error = float(np.max(np.abs(rho - rho_star)))
        v = float(0.5 * np.sum((np.array(record.r_bar) - target) ** 2 / means))
        checkpoints.append(Checkpoint(record.t, error, v))
        for b in band_entry:
            if band_entry[b] is None and error <= b:
                band_entry[b] = record.t

    times = np.array([c.t for c in checkpoints], dtype=float)
    values = np.array([c.V for c in checkpoints])
    trend = _rank_correlation(times, values)
    logger.debug(f"Convergence over {len(checkpoints)} checkpoint(s): final error {checkpoints[-1].max_error:.3g}")
    return ConvergenceReport(checkpoints, band_entry, trend)


def _rank_correlation(x: np.ndarray, y: np.ndarray) -> float:
    """Spearman correlation; 0.0 when either side has no spread."""
    if len(x) < 2 or np.ptp(x) == 0 or np.ptp(y) == 0:
        return 0.0
    return float(stats.spearmanr(x, y)[0])
