"""Well-formedness rules over a linked Model.

Each rule is a generator of diagnostics registered under its catalog code(s).
All rules always run; the combined list is sorted by (file, line, col, code).
"""

from __future__ import annotations

from collections import Counter
from itertools import islice
from typing import Callable, Iterator, Optional

import networkx as nx

from .diagnostics import Diagnostic, sort_diagnostics
from .model import (
    REFERENCE_TARGETS,
    DataField,
    DataObject,
    DataObjectField,
    ListType,
    Model,
    QualifiedName,
    Ref,
    ServiceContract,
    ServiceOperation,
    TechnologyKind,
    dangling_references,
    iter_named,
)

MAX_CYCLES = 10_000

Rule = Callable[[Model], Iterator[Diagnostic]]
RULES: list[tuple[tuple[str, ...], Rule]] = []


def rule(*codes: str):
    def register(fn: Rule) -> Rule:
        RULES.append((codes, fn))
        return fn

    return register


def _span(x):
    return getattr(x, "span", None)


def _rotate(cycle: list) -> list:
    k = cycle.index(min(cycle))
    return cycle[k:] + cycle[:k]


def elementary_cycles(graph: nx.DiGraph, limit: int = MAX_CYCLES) -> tuple[list[list[str]], bool]:
    """All elementary cycles of ``graph``, each rotated to its smallest node, sorted.

    At most ``limit`` cycles are collected; the flag reports truncation.
    """
    found = list(islice(nx.simple_cycles(graph), limit + 1))
    truncated = len(found) > limit
    cycles = sorted(_rotate([str(n) for n in c]) for c in found[:limit])
    return cycles, truncated


# -- data -------------------------------------------------------------------


@rule("D001", "D002")
def _structure_fields(model: Model):
    for dm in model.data_models:
        for obj in dm.data_objects:
            qn = dm.namespace.child(obj.name)
            if not obj.fields:
                yield Diagnostic("D002", f"structure {qn} declares no fields", obj.span)
            seen = {}
            for f in obj.fields:
                if f.name in seen:
                    related = (seen[f.name].span,) if seen[f.name].span else ()
                    yield Diagnostic("D001", f"field {f.name!r} is declared more than once in {qn}", f.span, related)
                else:
                    seen[f.name] = f


def nesting_graph(model: Model) -> nx.DiGraph:
    """Structure-to-structure containment, looking through list types."""
    g = nx.DiGraph()
    for dm in model.data_models:
        for obj in dm.data_objects:
            src = str(dm.namespace.child(obj.name))
            g.add_node(src)
            for f in obj.fields:
                if not isinstance(f, DataObjectField):
                    continue
                target = model.resolve(f.target.name)
                if isinstance(target, ListType):
                    if not isinstance(target.element, Ref):
                        continue
                    target_name = target.element.name
                else:
                    target_name = f.target.name
                if isinstance(model.resolve(target_name), DataObject):
                    g.add_edge(src, str(target_name))
    return g


@rule("D003")
def _recursive_structures(model: Model):
    g = nesting_graph(model)
    for comp in nx.strongly_connected_components(g):
        members = sorted(comp)
        if len(members) == 1 and not g.has_edge(members[0], members[0]):
            continue
        anchor = model.resolve(members[0])
        yield Diagnostic("D003", "recursive nesting among structures " + ", ".join(members), _span(anchor))


# -- service ----------------------------------------------------------------


def _parameters(model: Model):
    for svc in model.microservices:
        for iface in svc.interfaces:
            for op in iface.operations:
                opqn = svc.name.child(iface.name, op.name)
                for p in op.parameters:
                    yield svc, opqn, op, p


@rule("S001", "S002", "S008")
def _service_shape(model: Model):
    for svc in model.microservices:
        if not svc.interfaces:
            yield Diagnostic("S001", f"microservice {svc.name} has no interface", svc.span)
        for iface in svc.interfaces:
            if not iface.operations:
                yield Diagnostic("S002", f"interface {svc.name.child(iface.name)} has no operation", iface.span)
            for op in iface.operations:
                if not op.not_implemented and not op.parameters:
                    opqn = svc.name.child(iface.name, op.name)
                    yield Diagnostic("S008", f"operation {opqn} is implemented but has no parameters", op.span)


@rule("S003a", "S003b")
def _contract_ownership(model: Model):
    for svc in model.microservices:
        for c in svc.contracts:
            cqn = svc.name.child(c.name)
            for r in c.provides:
                owner = model.owner_service(r.name)
                if owner is not None and owner.name != svc.name:
                    yield Diagnostic(
                        "S003a", f"contract {cqn} provides {r.name}, which belongs to {owner.name}", r.span or c.span
                    )
            for r in c.requires:
                owner = model.owner_service(r.name)
                if owner is not None and owner.name == svc.name:
                    yield Diagnostic(
                        "S003b", f"contract {cqn} requires {r.name} of its own microservice", r.span or c.span
                    )


@rule("S004", "S005", "S006", "S009")
def _parameter_initialization(model: Model):
    for svc, opqn, _, p in _parameters(model):
        ref = p.initialized_by
        if ref is None:
            continue
        where = ref.span or p.span
        pqn = opqn.child(p.name)
        if not p.pattern.receives:
            yield Diagnostic("S005", f"output parameter {pqn} cannot be initialized by {ref.name}", where)
        init = model.resolve(ref.name)
        if not isinstance(init, ServiceOperation):
            continue
        owner = model.owner_service(ref.name)
        if owner is not None and owner.name == svc.name:
            yield Diagnostic("S004", f"parameter {pqn} is initialized by {ref.name} of the same microservice", where)
        if init.not_implemented:
            yield Diagnostic("S006", f"parameter {pqn} is initialized by not-implemented operation {ref.name}", where)
        if not any(q.pattern.provides and q.data_type == p.data_type for q in init.parameters):
            yield Diagnostic(
                "S009", f"{ref.name} has no output parameter of the type of {pqn}", where
            )


def pdid_graph(model: Model) -> nx.DiGraph:
    """Operations linked to the operations that initialize their parameters."""
    g = nx.DiGraph()
    for _, opqn, _, p in _parameters(model):
        g.add_node(str(opqn))
        if p.initialized_by is not None and isinstance(model.resolve(p.initialized_by.name), ServiceOperation):
            g.add_edge(str(opqn), str(p.initialized_by.name))
    for svc in model.microservices:
        for iface in svc.interfaces:
            for op in iface.operations:
                g.add_node(str(svc.name.child(iface.name, op.name)))
    return g


def pdid_cycles(model: Model, limit: int = MAX_CYCLES) -> tuple[list[list[str]], bool]:
    return elementary_cycles(pdid_graph(model), limit)


@rule("S007")
def _initialization_cycles(model: Model):
    cycles, truncated = pdid_cycles(model)
    for cycle in cycles:
        first = QualifiedName.parse(cycle[0])
        nxt = cycle[1 % len(cycle)]
        op = model.resolve(first)
        span = op.span
        for p in op.parameters:
            if p.initialized_by is not None and str(p.initialized_by.name) == nxt:
                span = p.span
                break
        text = " -> ".join(cycle + cycle[:1])
        yield Diagnostic("S007", f"parameter initialization cycle: {text}", span)
    if truncated:
        yield Diagnostic("S007", f"more than {MAX_CYCLES} initialization cycles; list truncated", None)


# -- operation --------------------------------------------------------------


@rule("O001", "O002")
def _artifact_shape(model: Model):
    for a in model.artifacts:
        n = len(a.service_technologies)
        if n != 1:
            yield Diagnostic("O001", f"artifact {a.name} has {n} service technologies, expected exactly one", a.span)
        owners = set()
        for r in a.contracts:
            owner = model.owner_service(r.name)
            if owner is not None:
                owners.add(str(owner.name))
        if len(owners) > 1:
            yield Diagnostic(
                "O002", f"artifact {a.name} bundles contracts of {', '.join(sorted(owners))}", a.span
            )


@rule("O003", "O004")
def _containers(model: Model):
    for c in model.containers:
        if c.min_instances < 1 or c.min_instances > c.max_instances:
            yield Diagnostic(
                "O003",
                f"container {c.name} has instance bounds {c.min_instances}..{c.max_instances}; "
                "need 1 <= min <= max",
                c.span,
            )
        supported = set(c.environment.service_technologies)
        for r in c.deploys:
            artifact = model.resolve(r.name)
            tech = getattr(artifact, "service_technology", None)
            if tech is not None and tech not in supported:
                yield Diagnostic(
                    "O004",
                    f"container {c.name} cannot run {r.name}: environment {c.environment.name!r} "
                    f"does not support {tech.name}",
                    r.span or c.span,
                )


def _technology_slots(model: Model):
    for a in model.artifacts:
        for r in a.service_technologies:
            yield r, TechnologyKind.SERVICE
        if a.load_balancer is not None:
            yield a.load_balancer, TechnologyKind.LOAD_BALANCER
        if a.circuit_breaker is not None:
            yield a.circuit_breaker, TechnologyKind.CIRCUIT_BREAKER
        for e in a.endpoints:
            yield e.protocol, TechnologyKind.PROTOCOL
            yield e.format, TechnologyKind.MESSAGE_FORMAT
    for c in model.containers:
        for r in c.environment.container_technologies:
            yield r, TechnologyKind.CONTAINER
        for r in c.environment.service_technologies:
            yield r, TechnologyKind.SERVICE


@rule("O006")
def _technology_kinds(model: Model):
    for ref, expected in _technology_slots(model):
        tech = model.technology(ref)
        if tech is not None and tech.kind is not expected:
            yield Diagnostic(
                "O006",
                f"kind mismatch: technology {tech.name} is {tech.kind.value}, expected {expected.value}",
                ref.span,
                (tech.span,) if tech.span else (),
            )


@rule("O005", "O007", "O008")
def _endpoints(model: Model):
    seen: dict[tuple[str, str], object] = {}
    for a in model.artifacts:
        bundled = {str(r.name) for r in a.contracts}
        provided = set()
        for r in a.contracts:
            c = model.resolve(r.name)
            if isinstance(c, ServiceContract):
                provided.update(str(i.name) for i in c.provides)
        for e in a.endpoints:
            if (e.operation is None) == (e.contract is None):
                both = "both an operation and a contract" if e.operation else "neither an operation nor a contract"
                yield Diagnostic("O005", f"endpoint {e.address!r} of {a.name} targets {both}", e.span)
            key = (e.address, str(e.protocol.name))
            if key in seen:
                first = seen[key]
                yield Diagnostic(
                    "O007",
                    f"endpoint {e.address!r} with protocol {e.protocol.name} is declared more than once",
                    e.span,
                    (first,) if first else (),
                )
            else:
                seen[key] = e.span
            if e.contract is not None and str(e.contract.name) not in bundled:
                yield Diagnostic("O008", f"endpoint target {e.contract.name} is not bundled by {a.name}", e.contract.span or e.span)
            if e.operation is not None:
                iface = e.operation.name.parent
                if iface is None or str(iface) not in provided:
                    yield Diagnostic(
                        "O008",
                        f"endpoint target {e.operation.name} is not provided by a contract bundled in {a.name}",
                        e.operation.span or e.span,
                    )


@rule("O009")
def _undeployed_services(model: Model):
    bundled = {str(r.name) for a in model.artifacts for r in a.contracts}
    for svc in model.microservices:
        names = [str(svc.name.child(c.name)) for c in svc.contracts]
        if names and not any(n in bundled for n in names):
            yield Diagnostic("O009", f"no artifact bundles a contract of microservice {svc.name}", svc.span)


@rule("O010")
def _undiscoverable_artifacts(model: Model):
    registered = {str(r.name) for reg in model.registrations for r in reg.registered}
    for a in model.artifacts:
        if str(a.name) not in registered:
            yield Diagnostic(
                "O010", f"artifact {a.name} is registered with neither a service discovery nor an API gateway", a.span
            )


def validate(model: Model, codes: Optional[set[str]] = None) -> list[Diagnostic]:
    """Run the rule catalog (or the rules covering ``codes``) over a linked model."""
    out = []
    for rule_codes, fn in RULES:
        if codes is None or codes.intersection(rule_codes):
            out.extend(d for d in fn(model) if codes is None or d.code in codes)
    return sort_diagnostics(out)


def structural_findings(model: Model) -> list[Diagnostic]:
    """Invariants the grammar enforces, checked again for models built by other means."""
    out = []
    # duplicate field names are D001
    counts = Counter(qn for qn, el in iter_named(model) if not isinstance(el, (DataField, DataObjectField)))
    for qn, n in sorted(counts.items(), key=lambda kv: str(kv[0])):
        if n > 1:
            out.append(Diagnostic("P102", f"duplicate definition of {qn}"))
    for ref, slot in dangling_references(model):
        target = model.resolve(ref.name)
        if target is None:
            out.append(Diagnostic("P101", f"unresolved reference {ref.name}", ref.span))
        else:
            expected = "/".join(t.__name__ for t in REFERENCE_TARGETS[slot])
            out.append(Diagnostic("P103", f"{ref.name} is a {type(target).__name__}, expected {expected}", ref.span))
    for svc in model.microservices:
        for c in svc.contracts:
            if not c.provides:
                out.append(Diagnostic("P004", f"contract {svc.name.child(c.name)} provides no interface", c.span))
    for a in model.artifacts:
        if not a.contracts:
            out.append(Diagnostic("P004", f"artifact {a.name} bundles no contract", a.span))
        for e in a.endpoints:
            if not e.address:
                out.append(Diagnostic("P006", f"endpoint of {a.name} has an empty address", e.span))
    for c in model.containers:
        env = c.environment
        if not env.name:
            out.append(Diagnostic("P006", f"container {c.name} has an empty environment name", c.span))
        if not env.container_technologies or not env.service_technologies:
            out.append(Diagnostic("P004", f"environment of container {c.name} needs container and service technologies", c.span))
        if not c.deploys:
            out.append(Diagnostic("P004", f"container {c.name} deploys no artifact", c.span))
    for reg in model.registrations:
        if not reg.registered:
            out.append(Diagnostic("P004", f"registration {reg.name} registers no artifact", reg.span))
    return out


def check_invariants(model: Model) -> list[Diagnostic]:
    """Every broken metamodel invariant: structural ones first, then rule ERRORs."""
    structural = structural_findings(model)
    if any(d.code in ("P101", "P103") for d in structural):
        return structural
    return structural + [d for d in validate(model) if d.is_error]
