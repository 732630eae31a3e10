"""
Endowments and per-slot draw laws.

`Endowments` holds the exact mean endowment D_i of every node together with
the global bound B on a single slot's draw. Each node also carries a
`DistributionSpec`, the law its per-slot amounts D_i(t) are drawn from in
simulation; its analytic mean must equal D_i exactly.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import AbstractSet, Any, Dict, Mapping, Optional, Tuple

import numpy as np

from .errors import InputError
from .utils import format_rational, to_fraction

DISTRIBUTION_KINDS = ("constant", "uniform", "bernoulli", "discrete")


@dataclass(frozen=True)
class DistributionSpec:
    """
    Bounded, non-negative law of a node's per-slot amount.

    kinds:
        constant            always `mean`
        uniform(a, b)       continuous uniform on [a, b]
        bernoulli(p, hi)    `hi` with probability p, else 0
        discrete(values, probs)
    """

    kind: str
    mean: Fraction
    low: Fraction = Fraction(0)
    high: Fraction = Fraction(0)
    p: Fraction = Fraction(0)
    values: Tuple[Fraction, ...] = ()
    probs: Tuple[Fraction, ...] = ()

    def __post_init__(self):
        if self.kind not in DISTRIBUTION_KINDS:
            raise InputError(f"Unknown distribution kind: {self.kind!r}")
        if self.kind == "uniform" and not (0 <= self.low <= self.high):
            raise InputError(f"uniform({self.low}, {self.high}) needs 0 <= a <= b")
        if self.kind == "bernoulli" and not (0 < self.p <= 1 and self.high >= 0):
            raise InputError(f"bernoulli({self.p}, {self.high}) needs p in (0, 1] and hi >= 0")
        if self.kind == "discrete":
            if not self.values or len(self.values) != len(self.probs):
                raise InputError("discrete distribution needs matching values and probs")
            if any(v < 0 for v in self.values) or any(q < 0 for q in self.probs):
                raise InputError("discrete distribution needs non-negative values and probs")
            if sum(self.probs) != 1:
                raise InputError("discrete probabilities must sum to 1 exactly")
        if self.mean < 0:
            raise InputError("Distribution mean must be non-negative")
        if self.analytic_mean() != self.mean:
            raise InputError(
                f"Declared mean {format_rational(self.mean)} differs from the analytic mean "
                f"{format_rational(self.analytic_mean())} of {self.kind}"
            )

    @classmethod
    def constant(cls, value: Any) -> "DistributionSpec":
        return cls("constant", to_fraction(value))

    @classmethod
    def uniform(cls, a: Any, b: Any) -> "DistributionSpec":
        a, b = to_fraction(a), to_fraction(b)
        return cls("uniform", (a + b) / 2, low=a, high=b)

    @classmethod
    def bernoulli(cls, p: Any, hi: Any) -> "DistributionSpec":
        p, hi = to_fraction(p), to_fraction(hi)
        return cls("bernoulli", p * hi, high=hi, p=p)

    @classmethod
    def discrete(cls, values, probs) -> "DistributionSpec":
        values = tuple(to_fraction(v) for v in values)
        probs = tuple(to_fraction(q) for q in probs)
        mean = sum((v * q for v, q in zip(values, probs)), Fraction(0))
        return cls("discrete", mean, values=values, probs=probs)

    @classmethod
    def around_mean(cls, kind: str, mean: Any) -> "DistributionSpec":
        """
        Standard law with a given mean: constant, uniform on [0, 2D] or
        bernoulli(1/2, 2D).
        """
        mean = to_fraction(mean)
        if kind == "constant":
            return cls.constant(mean)
        if kind == "uniform":
            return cls.uniform(0, 2 * mean)
        if kind == "bernoulli":
            return cls.bernoulli(Fraction(1, 2), 2 * mean)
        raise InputError(f"No standard law of kind {kind!r} around a mean")

    def analytic_mean(self) -> Fraction:
        if self.kind == "constant":
            return self.mean
        if self.kind == "uniform":
            return (self.low + self.high) / 2
        if self.kind == "bernoulli":
            return self.p * self.high
        return sum((v * q for v, q in zip(self.values, self.probs)), Fraction(0))

    @property
    def bound(self) -> Fraction:
        """Largest value in the support."""
        if self.kind == "constant":
            return self.mean
        if self.kind in ("uniform", "bernoulli"):
            return self.high
        return max(self.values)

    def sample(self, rng: np.random.Generator) -> float:
        """Draw one slot's amount."""
        if self.kind == "constant":
            return float(self.mean)
        if self.kind == "uniform":
            return float(rng.uniform(float(self.low), float(self.high)))
        if self.kind == "bernoulli":
            return float(self.high) if rng.random() < float(self.p) else 0.0
        index = rng.choice(len(self.values), p=[float(q) for q in self.probs])
        return float(self.values[index])

    def to_dict(self) -> Dict[str, Any]:
        """JSON form used in Graph documents (the mean lives on the node)."""
        if self.kind == "constant":
            return {"kind": "constant"}
        if self.kind == "uniform":
            return {"kind": "uniform", "a": format_rational(self.low), "b": format_rational(self.high)}
        if self.kind == "bernoulli":
            return {"kind": "bernoulli", "p": format_rational(self.p), "hi": format_rational(self.high)}
        return {
            "kind": "discrete",
            "values": [format_rational(v) for v in self.values],
            "probs": [format_rational(q) for q in self.probs],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], mean: Fraction) -> "DistributionSpec":
        kind = data.get("kind", "constant")
        if kind == "constant":
            spec = cls.constant(mean)
        elif kind == "uniform":
            spec = cls.uniform(data["a"], data["b"])
        elif kind == "bernoulli":
            spec = cls.bernoulli(data["p"], data["hi"])
        elif kind == "discrete":
            spec = cls.discrete(data["values"], data["probs"])
        else:
            raise InputError(f"Unknown distribution kind: {kind!r}")
        if spec.mean != mean:
            raise InputError(
                f"Distribution mean {format_rational(spec.mean)} does not match d_mean {format_rational(mean)}"
            )
        return spec


@dataclass(frozen=True)
class Endowments:
    """
    Mean endowments D_i > 0, the global draw bound B, and per-node draw laws.
    """

    means: Mapping[int, Fraction]
    bound: Fraction
    dists: Mapping[int, DistributionSpec] = field(default_factory=dict)

    def __post_init__(self):
        for node, value in self.means.items():
            if value <= 0:
                raise InputError(f"Endowment of node {node} must be positive, got {format_rational(value)}")
        if set(self.dists) != set(self.means):
            raise InputError("Every node needs exactly one draw distribution")
        for node, dist in self.dists.items():
            if dist.mean != self.means[node]:
                raise InputError(f"Distribution mean of node {node} differs from its endowment")
            if dist.bound > self.bound:
                raise InputError(
                    f"Bound B={format_rational(self.bound)} is below the support of node {node}'s draws"
                )

    @classmethod
    def from_means(
        cls,
        means: Mapping[int, Any],
        bound: Optional[Any] = None,
        dists: Optional[Mapping[int, DistributionSpec]] = None,
    ) -> "Endowments":
        """
        Build endowments from (possibly string) means.

        Args:
            means: node id -> mean endowment
            bound: Global bound B; defaults to the largest support bound
            dists: node id -> draw law; defaults to constant draws

        Returns:
            Validated Endowments
        """
        exact = {int(node): to_fraction(value) for node, value in means.items()}
        if not exact:
            raise InputError("Endowments need at least one node")
        laws = dict(dists) if dists is not None else {node: DistributionSpec.constant(v) for node, v in exact.items()}
        if bound is None:
            bound_value = max(law.bound for law in laws.values())
        else:
            bound_value = to_fraction(bound)
        return cls(dict(sorted(exact.items())), bound_value, dict(sorted(laws.items())))

    def __getitem__(self, node: int) -> Fraction:
        return self.means[node]

    def total(self, s: AbstractSet[int]) -> Fraction:
        """D(S) = Σ_{i∈S} D_i."""
        return sum((self.means[node] for node in s), Fraction(0))

    def scaled(self, c: Any) -> "Endowments":
        """Every mean, bound and draw law multiplied by the positive rational c."""
        c = to_fraction(c)
        if c <= 0:
            raise InputError("Scale factor must be positive")
        laws = {node: _scale_law(law, c) for node, law in self.dists.items()}
        return Endowments({node: v * c for node, v in self.means.items()}, self.bound * c, laws)

    def check_nodes(self, node_ids) -> None:
        """Raise unless the endowments cover exactly the given node ids."""
        if set(self.means) != set(node_ids):
            missing = sorted(set(node_ids) - set(self.means))
            extra = sorted(set(self.means) - set(node_ids))
            raise InputError(f"Endowments do not match the graph (missing {missing}, extra {extra})")


def _scale_law(law: DistributionSpec, c: Fraction) -> DistributionSpec:
    if law.kind == "constant":
        return DistributionSpec.constant(law.mean * c)
    if law.kind == "uniform":
        return DistributionSpec.uniform(law.low * c, law.high * c)
    if law.kind == "bernoulli":
        return DistributionSpec.bernoulli(law.p, law.high * c)
    return DistributionSpec.discrete([v * c for v in law.values], law.probs)
