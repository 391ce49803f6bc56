"""Interface descriptors and a Compose-style deployment manifest generated from a valid Model."""

from __future__ import annotations

import enum
import os
import warnings
from dataclasses import dataclass
from typing import Any, Optional, Union
from urllib.parse import urlsplit

import yaml

from .errors import AddressUnparsable, GenerationRefused, OutputConflict
from .model import (
    DataField,
    DataObject,
    ListType,
    Model,
    PrimitiveType,
    Ref,
    RegistrationKind,
    ServiceDeploymentArtifact,
)
from .serialize import dumps_document
from .validator import validate

MANIFEST_NAME = "docker-compose.yml"
COMPOSE_VERSION = "3.8"


class Target(str, enum.Enum):
    INTERFACE_DESCRIPTORS = "interfaces"
    DEPLOYMENT_MANIFEST = "deployment"


@dataclass(frozen=True)
class GenerationRequest:
    target: Target
    output_dir: str = "out"
    overwrite: bool = False


def _require_valid(model: Model) -> None:
    errors = [d for d in validate(model) if d.is_error]
    if errors:
        raise GenerationRefused(errors)


# -- data schemas -----------------------------------------------------------


class _Schemas:
    """Expands data types into nested schemas.

    Structures are inlined as ``{field: schema}``, lists as ``[element]`` and
    primitives as their name. A structure met again while it is being expanded
    becomes ``{"$ref": name}`` and is defined once under ``definitions``.
    """

    def __init__(self, model: Model):
        self.model = model
        self.definitions: dict[str, Any] = {}

    def of(self, t: Union[PrimitiveType, Ref], stack: tuple[str, ...] = ()) -> Any:
        if isinstance(t, PrimitiveType):
            return t.value
        target = self.model.resolve(t.name)
        if isinstance(target, ListType):
            return [self.of(target.element, stack)]
        return self.structure(str(t.name), stack)

    def structure(self, name: str, stack: tuple[str, ...]) -> Any:
        if name in stack:
            if name not in self.definitions:
                self.definitions[name] = None  # placeholder stops re-entry
                self.definitions[name] = self.structure(name, ())
            return {"$ref": name}
        obj = self.model.resolve(name)
        assert isinstance(obj, DataObject), name
        inner = stack + (name,)
        out = {}
        for f in obj.fields:
            if isinstance(f, DataField):
                out[f.name] = f.type.value
            elif f.is_list:
                out[f.name] = self.of(f.target, inner)
            else:
                out[f.name] = self.structure(str(f.target.name), inner)
        return out


def _type_name(t: Union[PrimitiveType, Ref]) -> str:
    return t.value if isinstance(t, PrimitiveType) else str(t.name)


def _endpoint_json(model: Model, e) -> dict:
    return {
        "address": e.address,
        "protocol": model.resolve(e.protocol.name).name.last,
        "format": model.resolve(e.format.name).name.last,
    }


def gen_interface_descriptors(model: Model) -> dict[str, str]:
    """One JSON descriptor per microservice, keyed by ``<qualified-name>.interface.json``."""
    _require_valid(model)
    op_endpoints: dict[str, list[dict]] = {}
    contract_endpoints: dict[str, list[dict]] = {}
    for a in model.artifacts:
        for e in a.endpoints:
            if e.operation is not None:
                op_endpoints.setdefault(str(e.operation.name), []).append(_endpoint_json(model, e))
            elif e.contract is not None:
                owner = model.owner_service(e.contract.name)
                contract = model.resolve(e.contract.name)
                entry = _endpoint_json(model, e)
                entry["contract"] = str(e.contract.name)
                entry["provides"] = [str(r.name) for r in contract.provides]
                contract_endpoints.setdefault(str(owner.name), []).append(entry)

    out = {}
    for svc in model.microservices:
        schemas = _Schemas(model)
        interfaces = []
        for iface in svc.interfaces:
            ops = []
            for op in iface.operations:
                opqn = str(svc.name.child(iface.name, op.name))
                ops.append(
                    {
                        "name": op.name,
                        "notImplemented": op.not_implemented,
                        "parameters": [
                            {
                                "name": p.name,
                                "pattern": p.pattern.value,
                                "commType": p.comm_type.value,
                                "type": _type_name(p.data_type),
                                "schema": schemas.of(p.data_type),
                                "initializedBy": None if p.initialized_by is None else str(p.initialized_by.name),
                            }
                            for p in op.parameters
                        ],
                        "endpoints": [] if op.not_implemented else op_endpoints.get(opqn, []),
                    }
                )
            interfaces.append({"name": iface.name, "operations": ops})
        doc = {
            "name": str(svc.name),
            "type": svc.type.value,
            "interfaces": interfaces,
            "contractEndpoints": contract_endpoints.get(str(svc.name), []),
            "definitions": schemas.definitions,
        }
        out[f"{svc.name}.interface.json"] = dumps_document(doc)
    return out


# -- deployment manifest ----------------------------------------------------


def endpoint_port(address: str) -> Optional[int]:
    """The numeric port of a ``host:port`` address (with or without scheme), if any."""
    parts = urlsplit(address if "://" in address else "//" + address)
    try:
        return parts.port
    except ValueError:
        return None


def _techs(model: Model, refs) -> str:
    return ",".join(sorted({model.resolve(r.name).name.last for r in refs if r is not None}))


def gen_deployment_manifest(model: Model) -> str:
    """A Compose-compatible YAML document with one service entry per container.

    Endpoint addresses without a port trigger an :class:`AddressUnparsable`
    warning; the entry is still emitted, just without that port.
    """
    _require_valid(model)
    services: dict[str, Any] = {}
    for c in model.containers:
        artifacts: list[ServiceDeploymentArtifact] = [model.resolve(r.name) for r in c.deploys]
        deployed = {str(a.name) for a in artifacts}
        ports = set()
        for a in artifacts:
            for e in a.endpoints:
                port = endpoint_port(e.address)
                if port is None:
                    warnings.warn(AddressUnparsable(f"{a.name}: endpoint address {e.address!r} has no port"), stacklevel=2)
                else:
                    ports.add(port)
        labels = {"msa.artifacts": ",".join(sorted(deployed))}
        lb = _techs(model, [a.load_balancer for a in artifacts])
        cb = _techs(model, [a.circuit_breaker for a in artifacts])
        if lb:
            labels["msa.load-balancer"] = lb
        if cb:
            labels["msa.circuit-breaker"] = cb

        def registered(kind: RegistrationKind) -> list[str]:
            return sorted(
                str(reg.name)
                for reg in model.registrations
                if reg.kind is kind and deployed & {str(r.name) for r in reg.registered}
            )

        services[str(c.name)] = {
            "image": c.environment.name,
            "deploy": {"replicas": c.min_instances},
            "x-msa-max-instances": c.max_instances,
            "ports": [{"target": p, "published": p} for p in sorted(ports)],
            "labels": labels,
            "x-msa-discovery": registered(RegistrationKind.SERVICE_DISCOVERY),
            "x-msa-gateway": registered(RegistrationKind.API_GATEWAY),
        }
    doc = {"version": COMPOSE_VERSION, "services": services}
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=False, allow_unicode=True)


# -- writing ----------------------------------------------------------------


def generate(request: GenerationRequest, model: Model) -> list[str]:
    """Render the requested target and write it below ``request.output_dir``.

    Nothing is written when any output file already exists and ``overwrite`` is off.
    Returns the written paths.
    """
    if Target(request.target) is Target.INTERFACE_DESCRIPTORS:
        files = gen_interface_descriptors(model)
    else:
        files = {MANIFEST_NAME: gen_deployment_manifest(model)}
    paths = {os.path.join(request.output_dir, name): text for name, text in sorted(files.items())}
    if not request.overwrite:
        existing = [p for p in paths if os.path.exists(p)]
        if existing:
            raise OutputConflict(existing)
    os.makedirs(request.output_dir, exist_ok=True)
    for path, text in paths.items():
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return list(paths)
