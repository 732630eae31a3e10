"""
Documents

Readers and writers for the files the command line exchanges:

- Graph JSON: nodes with exact mean endowments and draw laws, edges, bound B
- Solution JSON: the graph it was solved on (and its hash), the level
  decomposition, one allocation and optional certification reports
- Trace CSV: one row per recorded slot and node, header `t,node,r_bar,rho,estimate,V`
- Report JSON and a gnuplot script for the trace

Rationals are written as "p/q" strings so every exact value survives a
round trip; float columns carry 12 significant digits.
"""

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, FrozenSet, List, Mapping, Optional, Tuple

from .dynamics import SimRecord, SimTrace
from .endowments import DistributionSpec, Endowments
from .errors import DocumentError, InputError
from .graph import Graph
from .lexopt import Allocation, LevelDecomposition
from .utils import FLOAT_DIGITS, canonical_hash, format_rational, render_float, to_fraction

logger = logging.getLogger(__name__)

TRACE_HEADER = ["t", "node", "r_bar", "rho", "estimate", "V"]


def _rational(value: Any, path: Optional[str], location: str) -> Fraction:
    try:
        return to_fraction(value)
    except InputError as e:
        raise DocumentError(str(e), path, location)


def _read_json(path: str) -> Any:
    try:
        with open(path, "r") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise DocumentError(f"Invalid JSON: {e.msg}", path, f"line {e.lineno}, column {e.colno}")


def _write_json(path: str, payload: Any) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")


def graph_to_dict(g: Graph, d: Endowments, meta: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    """Graph JSON payload of an instance."""
    d.check_nodes(g.node_ids)
    return {
        "nodes": [
            {"id": i, "d_mean": format_rational(d.means[i]), "dist": d.dists[i].to_dict()} for i in g.node_ids
        ],
        "edges": [[i, j] for i, j in g.sorted_edges()],
        "bound": format_rational(d.bound),
        "meta": dict(meta or {}),
    }


def graph_from_dict(data: Any, path: Optional[str] = None) -> Tuple[Graph, Endowments, Dict[str, Any]]:
    """
    Parse a Graph JSON payload.

    Args:
        data: Decoded JSON
        path: File name used in error messages

    Returns:
        (graph, endowments, meta); the graph must be connected with at least
        two nodes

    Raises:
        DocumentError: With the offending field on any malformed entry
    """
    if not isinstance(data, dict):
        raise DocumentError("Graph document must be a JSON object", path)
    nodes = data.get("nodes")
    if not isinstance(nodes, list) or not nodes:
        raise DocumentError("Missing or empty node list", path, "nodes")

    ids: List[int] = []
    means: Dict[int, Fraction] = {}
    laws: Dict[int, DistributionSpec] = {}
    for k, entry in enumerate(nodes):
        where = f"nodes[{k}]"
        if not isinstance(entry, dict) or "id" not in entry or "d_mean" not in entry:
            raise DocumentError("Node entries need 'id' and 'd_mean'", path, where)
        node = entry["id"]
        if isinstance(node, bool) or not isinstance(node, int):
            raise DocumentError(f"Node id must be an integer, got {node!r}", path, f"{where}.id")
        mean = _rational(entry["d_mean"], path, f"{where}.d_mean")
        try:
            law = DistributionSpec.from_dict(entry.get("dist") or {"kind": "constant"}, mean)
        except (InputError, KeyError) as e:
            raise DocumentError(f"Bad distribution: {e}", path, f"{where}.dist")
        ids.append(node)
        means[node] = mean
        laws[node] = law

    edges = data.get("edges", [])
    if not isinstance(edges, list):
        raise DocumentError("Edges must be a list of pairs", path, "edges")
    pairs = []
    for k, edge in enumerate(edges):
        if not isinstance(edge, list) or len(edge) != 2:
            raise DocumentError(f"Edge must be a pair of ids, got {edge!r}", path, f"edges[{k}]")
        pairs.append((edge[0], edge[1]))

    bound = data.get("bound")
    try:
        g = Graph(ids, pairs, require_connected=True)
        d = Endowments.from_means(
            means, bound=None if bound is None else _rational(bound, path, "bound"), dists=laws
        )
    except DocumentError:
        raise
    except InputError as e:
        raise DocumentError(str(e), path)
    return g, d, dict(data.get("meta") or {})


def save_graph(path: str, g: Graph, d: Endowments, meta: Optional[Mapping[str, Any]] = None) -> None:
    _write_json(path, graph_to_dict(g, d, meta))
    logger.info(f"✅ Wrote graph document: {path}")


def load_graph(path: str) -> Tuple[Graph, Endowments, Dict[str, Any]]:
    return graph_from_dict(_read_json(path), path)


@dataclass
class SolutionDocument:
    """A solved instance as written to disk."""

    graph: Graph
    endowments: Endowments
    decomposition: LevelDecomposition
    allocation: Allocation
    certification: Optional[Dict[str, Any]] = None
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def graph_hash(self) -> str:
        return canonical_hash(graph_to_dict(self.graph, self.endowments))

    def to_dict(self, digits: int = FLOAT_DIGITS) -> Dict[str, Any]:
        dec = self.decomposition
        return {
            "graph": graph_to_dict(self.graph, self.endowments),
            "graph_hash": self.graph_hash,
            "levels": [
                {
                    "value": format_rational(value),
                    "float": render_float(value, digits),
                    "nodes": sorted(members),
                }
                for value, members in zip(dec.levels, dec.level_sets)
            ],
            "ratios": {str(i): format_rational(v) for i, v in dec.ratios.items()},
            "received": {str(i): format_rational(v) for i, v in dec.received.items()},
            "transfers": [
                {"from": i, "to": j, "amount": format_rational(v), "float": render_float(v, digits)}
                for (i, j), v in sorted(self.allocation.transfers.items())
            ],
            "certification": self.certification,
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, data: Any, path: Optional[str] = None) -> "SolutionDocument":
        """
        Parse a Solution JSON payload.

        The stored decomposition is taken as written, not recomputed, so the
        verifier checks exactly what the file claims.

        Raises:
            DocumentError: On malformed fields or a graph hash mismatch
        """
        if not isinstance(data, dict) or "graph" not in data:
            raise DocumentError("Solution document needs an embedded 'graph'", path)
        g, d, _ = graph_from_dict(data["graph"], path)
        solution = cls(g, d, LevelDecomposition((), (), {}, {}), Allocation({}))
        if data.get("graph_hash") not in (None, solution.graph_hash):
            raise DocumentError("Embedded graph does not match its hash", path, "graph_hash")

        levels, level_sets = [], []
        for k, entry in enumerate(data.get("levels") or []):
            try:
                levels.append(_rational(entry["value"], path, f"levels[{k}].value"))
                level_sets.append(frozenset(int(i) for i in entry["nodes"]))
            except (KeyError, TypeError, ValueError) as e:
                raise DocumentError(f"Bad level entry: {e}", path, f"levels[{k}]")
        nodes = frozenset(g.node_ids)
        for k, members in enumerate(level_sets):
            if not members <= nodes:
                raise DocumentError(f"Unknown node(s) {sorted(members - nodes)}", path, f"levels[{k}].nodes")
        ratios = cls._node_map(data, "ratios", path, nodes)
        received = cls._node_map(data, "received", path, nodes)

        transfers: Dict[Tuple[int, int], Fraction] = {}
        for k, entry in enumerate(data.get("transfers") or []):
            try:
                key = (int(entry["from"]), int(entry["to"]))
            except (KeyError, TypeError, ValueError) as e:
                raise DocumentError(f"Bad transfer entry: {e}", path, f"transfers[{k}]")
            transfers[key] = _rational(entry.get("amount"), path, f"transfers[{k}].amount")

        solution.decomposition = LevelDecomposition(tuple(levels), tuple(level_sets), ratios, received)
        solution.allocation = Allocation(transfers)
        solution.certification = data.get("certification")
        solution.meta = dict(data.get("meta") or {})
        return solution

    @staticmethod
    def _node_map(
        data: Mapping[str, Any], key: str, path: Optional[str], nodes: FrozenSet[int]
    ) -> Dict[int, Fraction]:
        raw = data.get(key)
        if not isinstance(raw, dict):
            raise DocumentError(f"Missing '{key}' map", path, key)
        try:
            values = {int(i): _rational(v, path, f"{key}.{i}") for i, v in sorted(raw.items(), key=lambda kv: int(kv[0]))}
        except ValueError as e:
            raise DocumentError(f"Bad node id: {e}", path, key)
        # one entry per graph node
        if set(values) != nodes:
            missing, extra = sorted(nodes - set(values)), sorted(set(values) - nodes)
            raise DocumentError(f"'{key}' must cover the graph nodes (missing {missing}, unknown {extra})", path, key)
        return values


def save_solution(path: str, solution: SolutionDocument, digits: int = FLOAT_DIGITS) -> None:
    _write_json(path, solution.to_dict(digits))
    logger.info(f"✅ Wrote solution document: {path}")


def load_solution(path: str) -> SolutionDocument:
    return SolutionDocument.from_dict(_read_json(path), path)


def trace_to_csv(trace: SimTrace, digits: int = FLOAT_DIGITS) -> str:
    """Trace CSV text; V is empty when the run had no reference rates."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for record in trace.records:
        v = "" if record.V is None else repr(render_float(record.V, digits))
        for k, node in enumerate(trace.node_ids):
            writer.writerow(
                [
                    record.t,
                    node,
                    repr(render_float(record.r_bar[k], digits)),
                    repr(render_float(record.rho[k], digits)),
                    repr(render_float(record.estimate[k], digits)),
                    v,
                ]
            )
    return buffer.getvalue()


def save_trace(path: str, trace: SimTrace, digits: int = FLOAT_DIGITS) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        f.write(trace_to_csv(trace, digits))
    logger.info(f"✅ Wrote trace: {path} ({len(trace.records)} record(s))")


def load_trace(path: str, d: Endowments) -> SimTrace:
    """
    Read a trace CSV back into a SimTrace.

    Args:
        path: CSV file
        d: Endowments of the traced instance (supplies the node means)

    Raises:
        DocumentError: On a wrong header, unparsable cells, or rows that do
            not cover the nodes of `d` slot by slot
    """
    node_ids = tuple(sorted(d.means))
    slots: Dict[int, Dict[int, Tuple[float, float, float, Optional[float]]]] = {}
    with open(path, "r", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != TRACE_HEADER:
            raise DocumentError(f"Expected header {','.join(TRACE_HEADER)}", path, "line 1")
        for line, row in enumerate(reader, start=2):
            if len(row) != len(TRACE_HEADER):
                raise DocumentError(f"Expected {len(TRACE_HEADER)} fields, got {len(row)}", path, f"line {line}")
            try:
                t, node = int(row[0]), int(row[1])
                values = (float(row[2]), float(row[3]), float(row[4]), float(row[5]) if row[5] else None)
            except ValueError as e:
                raise DocumentError(f"Unparsable field: {e}", path, f"line {line}")
            if node not in d.means:
                raise DocumentError(f"Unknown node {node}", path, f"line {line}")
            slots.setdefault(t, {})[node] = values

    trace = SimTrace(node_ids, tuple(float(d.means[i]) for i in node_ids))
    for t in sorted(slots):
        rows = slots[t]
        if set(rows) != set(node_ids):
            raise DocumentError(f"Slot {t} does not list every node", path)
        trace.records.append(
            SimRecord(
                t,
                tuple(rows[i][0] for i in node_ids),
                tuple(rows[i][1] for i in node_ids),
                tuple(rows[i][2] for i in node_ids),
                rows[node_ids[0]][3],
            )
        )
    if not trace.records:
        raise DocumentError("Trace has no records", path)
    return trace


def save_report(path: str, payload: Mapping[str, Any]) -> None:
    _write_json(path, dict(payload))
    logger.info(f"✅ Wrote report: {path}")


def gnuplot_script(trace_path: str, node_ids) -> str:
    """
    gnuplot commands plotting ρ_i(t) per node and V(t) from a trace CSV.
    """
    lines = [
        "set datafile separator ','",
        "set key outside right",
        "set xlabel 't'",
        "set multiplot layout 2,1",
        "set ylabel 'sharing ratio'",
    ]
    curves = [
        f"'{trace_path}' using 1:($2=={i} ? $4 : 1/0) every ::1 with lines title 'node {i}'" for i in node_ids
    ]
    lines.append("plot " + ", \\\n     ".join(curves))
    lines += [
        "set ylabel 'V'",
        "set logscale y",
        f"plot '{trace_path}' using 1:($2=={node_ids[0]} ? $6 : 1/0) every ::1 with lines title 'V'",
        "unset multiplot",
    ]
    return "\n".join(lines) + "\n"
