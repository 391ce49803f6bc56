"""Microservice interaction graph built from contract- and parameter-driven dependencies."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import networkx as nx

from .model import Model
from .validator import MAX_CYCLES, elementary_cycles


class EdgeKind(str, enum.Enum):
    CDID = "CDID"  # a contract requires an interface of the provider
    PDID = "PDID"  # a parameter is initialized by an operation of the provider


@dataclass(frozen=True, order=True)
class InteractionEdge:
    consumer: str
    provider: str
    kind: EdgeKind
    witness: str


@dataclass(frozen=True)
class InteractionGraph:
    nodes: tuple[str, ...] = ()
    edges: tuple[InteractionEdge, ...] = ()

    def __post_init__(self) -> None:
        nodes = set(self.nodes)
        for e in self.edges:
            nodes.update((e.consumer, e.provider))
        object.__setattr__(self, "nodes", tuple(sorted(nodes)))
        object.__setattr__(self, "edges", tuple(sorted(set(self.edges))))

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from((e.consumer, e.provider) for e in self.edges)
        return g


def dependency_graph(model: Model) -> InteractionGraph:
    """One CDID edge per required interface and one PDID edge per ``initialized by`` clause."""
    edges = []
    for svc in model.microservices:
        consumer = str(svc.name)
        for c in svc.contracts:
            cqn = svc.name.child(c.name)
            for r in c.requires:
                provider = model.owner_service(r.name)
                if provider is not None:
                    edges.append(InteractionEdge(consumer, str(provider.name), EdgeKind.CDID, f"{cqn} requires {r.name}"))
        for iface in svc.interfaces:
            for op in iface.operations:
                for p in op.parameters:
                    if p.initialized_by is None:
                        continue
                    provider = model.owner_service(p.initialized_by.name)
                    if provider is not None:
                        witness = str(svc.name.child(iface.name, op.name, p.name))
                        edges.append(InteractionEdge(consumer, str(provider.name), EdgeKind.PDID, witness))
    return InteractionGraph(tuple(str(s.name) for s in model.microservices), tuple(edges))


class CycleList(list):
    """Sorted elementary cycles; ``truncated`` is set when the enumeration cap was hit."""

    truncated: bool = False


def detect_cycles(g: InteractionGraph, limit: int = MAX_CYCLES) -> CycleList:
    cycles, truncated = elementary_cycles(g.to_networkx(), limit)
    out = CycleList(cycles)
    out.truncated = truncated
    return out


@dataclass(frozen=True)
class NodeCoupling:
    fan_in: int
    fan_out: int


@dataclass(frozen=True)
class CouplingMetrics:
    nodes: dict[str, NodeCoupling]
    edges_by_kind: dict[str, int]

    def to_json(self) -> dict:
        return {
            "nodes": {n: {"fanIn": c.fan_in, "fanOut": c.fan_out} for n, c in self.nodes.items()},
            "edgesByKind": dict(self.edges_by_kind),
        }


def coupling_metrics(g: InteractionGraph) -> CouplingMetrics:
    """Fan-in counts distinct consumers, fan-out distinct providers."""
    pairs = {(e.consumer, e.provider) for e in g.edges}
    nodes = {
        n: NodeCoupling(
            fan_in=sum(1 for _, p in pairs if p == n),
            fan_out=sum(1 for c, _ in pairs if c == n),
        )
        for n in g.nodes
    }
    by_kind = {k.value: sum(1 for e in g.edges if e.kind is k) for k in EdgeKind}
    return CouplingMetrics(nodes, by_kind)


def _dot_id(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(g: InteractionGraph) -> str:
    lines = ["digraph msa {"]
    for n in g.nodes:
        lines.append(f"  {_dot_id(n)} [label={_dot_id(n)}];")
    for e in g.edges:
        style = "solid" if e.kind is EdgeKind.CDID else "dashed"
        lines.append(
            f"  {_dot_id(e.consumer)} -> {_dot_id(e.provider)} "
            f"[style={style}, label={_dot_id(e.kind.value)}, tooltip={_dot_id(e.witness)}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_to_json(g: InteractionGraph) -> dict:
    cycles = detect_cycles(g)
    return {
        "nodes": list(g.nodes),
        "edges": [
            {"consumer": e.consumer, "provider": e.provider, "kind": e.kind.value, "witness": e.witness}
            for e in g.edges
        ],
        "cycles": list(cycles),
        "cyclesTruncated": cycles.truncated,
        "metrics": coupling_metrics(g).to_json(),
    }


def export_json(g: InteractionGraph) -> str:
    return json.dumps(graph_to_json(g), sort_keys=True, indent=2) + "\n"
