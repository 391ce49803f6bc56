"""Canonical pretty-printer for parse units."""

from __future__ import annotations

from typing import Union

from .lexer import quote
from .model import (
    Container,
    DataField,
    DataObject,
    DiscoverabilityRegistration,
    Endpoint,
    ListType,
    Microservice,
    Parameter,
    PrimitiveType,
    Ref,
    RegistrationKind,
    ServiceContract,
    ServiceDeploymentArtifact,
    ServiceInterface,
    ServiceOperation,
    TechnologyDescriptor,
)
from .parser import COMM_TYPES, PATTERNS, SERVICE_TYPES, TECH_KINDS, ParseUnit

INDENT = "  "

_KEYWORD_OF = {
    **{v: k for k, v in PATTERNS.items()},
    **{v: k for k, v in COMM_TYPES.items()},
    **{v: k for k, v in SERVICE_TYPES.items()},
    **{v: k for k, v in TECH_KINDS.items()},
    RegistrationKind.SERVICE_DISCOVERY: "discovery",
    RegistrationKind.API_GATEWAY: "gateway",
}


def _t(t: Union[PrimitiveType, Ref]) -> str:
    return t.value if isinstance(t, PrimitiveType) else str(t.name)


def _refs(refs) -> str:
    return ", ".join(str(r.name) for r in refs)


def _structure(obj: DataObject) -> list[str]:
    lines = [f"structure {obj.name} {{"]
    for f in obj.fields:
        if isinstance(f, DataField):
            lines.append(f"{INDENT}{f.name}: {f.type.value}")
        else:
            lines.append(f"{INDENT}{f.name}: {'list ' if f.is_list else ''}{f.target.name}")
    lines.append("}")
    return lines


def _list(lt: ListType) -> list[str]:
    return [f"list {lt.name} {{", f"{INDENT}element {_t(lt.element)}", "}"]


def _param(p: Parameter) -> str:
    text = f"{_KEYWORD_OF[p.pattern]} {_KEYWORD_OF[p.comm_type]} {p.name}: {_t(p.data_type)}"
    if p.initialized_by is not None:
        text += f" initialized by {p.initialized_by.name}"
    return text


def _operation(op: ServiceOperation) -> str:
    prefix = "not-implemented " if op.not_implemented else ""
    return f"{prefix}operation {op.name}({', '.join(_param(p) for p in op.parameters)})"


def _interface(iface: ServiceInterface) -> list[str]:
    return [f"interface {iface.name} {{", *(INDENT + _operation(op) for op in iface.operations), "}"]


def _contract(c: ServiceContract) -> list[str]:
    lines = [f"contract {c.name} {{"]
    if c.provides:
        lines.append(f"{INDENT}provides {_refs(c.provides)}")
    if c.requires:
        lines.append(f"{INDENT}requires {_refs(c.requires)}")
    lines.append("}")
    return lines


def _microservice(svc: Microservice) -> list[str]:
    lines = [f"{_KEYWORD_OF[svc.type]} microservice {svc.name} {{"]
    blocks = [_interface(i) for i in svc.interfaces] + [_contract(c) for c in svc.contracts]
    for n, block in enumerate(blocks):
        if n:
            lines.append("")
        lines.extend(INDENT + line for line in block)
    lines.append("}")
    return lines


def _endpoint(e: Endpoint) -> str:
    text = f"endpoint {quote(e.address)} protocol {e.protocol.name} format {e.format.name}"
    targets = []
    if e.operation is not None:
        targets.append(f"operation {e.operation.name}")
    if e.contract is not None:
        targets.append(f"contract {e.contract.name}")
    if targets:
        text += " for " + " ".join(targets)
    return text


def _artifact(a: ServiceDeploymentArtifact) -> list[str]:
    body = [f"contracts {_refs(a.contracts)}"]
    body += [f"service {r.name}" for r in a.service_technologies]
    if a.load_balancer is not None:
        body.append(f"load-balancer {a.load_balancer.name}")
    if a.circuit_breaker is not None:
        body.append(f"circuit-breaker {a.circuit_breaker.name}")
    body += [_endpoint(e) for e in a.endpoints]
    return [f"artifact {a.name} {{", *(INDENT + b for b in body), "}"]


def _container(c: Container) -> list[str]:
    env = c.environment
    return [
        f"container {c.name} {{",
        f"{INDENT}environment {quote(env.name)} container {_refs(env.container_technologies)}"
        f" service {_refs(env.service_technologies)}",
        f"{INDENT}instances {c.min_instances}..{c.max_instances}",
        f"{INDENT}deploys {_refs(c.deploys)}",
        "}",
    ]


def _declaration(decl) -> list[str]:
    if isinstance(decl, DataObject):
        return _structure(decl)
    if isinstance(decl, ListType):
        return _list(decl)
    if isinstance(decl, Microservice):
        return _microservice(decl)
    if isinstance(decl, TechnologyDescriptor):
        return [f"technology {decl.name}: {_KEYWORD_OF[decl.kind]}"]
    if isinstance(decl, ServiceDeploymentArtifact):
        return _artifact(decl)
    if isinstance(decl, Container):
        return _container(decl)
    if isinstance(decl, DiscoverabilityRegistration):
        return [f"{_KEYWORD_OF[decl.kind]} {decl.name} registers {_refs(decl.registered)}"]
    raise TypeError(f"cannot format {type(decl).__name__}")


def format_unit(unit: ParseUnit) -> str:
    """Render ``unit`` as canonical source text.

    Layout: namespace header, imports, then one block per declaration in
    declaration order, separated by blank lines, indented by two spaces.
    Comments are not preserved.
    """
    if unit.namespace is None:
        raise ValueError("cannot format a unit without a namespace header")
    blocks = [[f"namespace {unit.namespace}"]]
    if unit.imports:
        blocks.append([f"import {quote(i.path)} as {i.alias}" for i in unit.imports])
    blocks += [_declaration(d) for d in unit.declarations]
    return "\n\n".join("\n".join(b) for b in blocks) + "\n"

