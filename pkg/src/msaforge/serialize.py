"""Canonical JSON document for linked models.

Keys are sorted, sequences keep declaration order and references are rendered
as qualified-name strings, so structurally equal models produce identical bytes.
"""

from __future__ import annotations

import json
from typing import Any, Optional, Union

from .errors import DanglingReference, InvariantViolation, MalformedDocument
from .model import (
    CommPattern,
    CommType,
    Container,
    DataField,
    DataModel,
    DataObject,
    DataObjectField,
    DiscoverabilityRegistration,
    Endpoint,
    ListType,
    Microservice,
    MicroserviceType,
    Model,
    OperatingEnvironment,
    Parameter,
    PrimitiveType,
    QualifiedName,
    Ref,
    RegistrationKind,
    ServiceContract,
    ServiceDeploymentArtifact,
    ServiceInterface,
    ServiceOperation,
    TechnologyDescriptor,
    TechnologyKind,
    dangling_references,
    is_identifier,
)

FORMAT_VERSION = "1"


def _ref(r: Optional[Ref]) -> Optional[str]:
    return None if r is None else str(r.name)


def _refs(rs) -> list[str]:
    return [str(r.name) for r in rs]


def _type(t: Union[PrimitiveType, Ref]) -> dict:
    if isinstance(t, PrimitiveType):
        return {"primitive": t.value}
    return {"ref": str(t.name)}


def _field(f) -> dict:
    if isinstance(f, DataField):
        return {"name": f.name, "primitive": f.type.value}
    return {"name": f.name, ("list" if f.is_list else "object"): str(f.target.name)}


def model_to_document(model: Model) -> dict[str, Any]:
    return {
        "version": FORMAT_VERSION,
        "data": [
            {
                "namespace": str(dm.namespace),
                "dataObjects": [
                    {"name": o.name, "fields": [_field(f) for f in o.fields]} for o in dm.data_objects
                ],
                "listTypes": [{"name": lt.name, "element": _type(lt.element)} for lt in dm.list_types],
            }
            for dm in model.data_models
        ],
        "services": [
            {
                "name": str(s.name),
                "type": s.type.value,
                "interfaces": [
                    {
                        "name": i.name,
                        "operations": [
                            {
                                "name": op.name,
                                "notImplemented": op.not_implemented,
                                "parameters": [
                                    {
                                        "name": p.name,
                                        "pattern": p.pattern.value,
                                        "commType": p.comm_type.value,
                                        "dataType": _type(p.data_type),
                                        "initializedBy": _ref(p.initialized_by),
                                    }
                                    for p in op.parameters
                                ],
                            }
                            for op in i.operations
                        ],
                    }
                    for i in s.interfaces
                ],
                "contracts": [
                    {"name": c.name, "provides": _refs(c.provides), "requires": _refs(c.requires)}
                    for c in s.contracts
                ],
            }
            for s in model.microservices
        ],
        "technologies": [{"name": str(t.name), "kind": t.kind.value} for t in model.technologies],
        "artifacts": [
            {
                "name": str(a.name),
                "contracts": _refs(a.contracts),
                "serviceTechnology": (
                    _ref(a.service_technology) if len(a.service_technologies) == 1 else _refs(a.service_technologies)
                ),
                "loadBalancer": _ref(a.load_balancer),
                "circuitBreaker": _ref(a.circuit_breaker),
                "endpoints": [
                    {
                        "address": e.address,
                        "protocol": _ref(e.protocol),
                        "format": _ref(e.format),
                        "operation": _ref(e.operation),
                        "contract": _ref(e.contract),
                    }
                    for e in a.endpoints
                ],
            }
            for a in model.artifacts
        ],
        "containers": [
            {
                "name": str(c.name),
                "environment": {
                    "name": c.environment.name,
                    "containerTechnologies": _refs(c.environment.container_technologies),
                    "serviceTechnologies": _refs(c.environment.service_technologies),
                },
                "minInstances": c.min_instances,
                "maxInstances": c.max_instances,
                "deploys": _refs(c.deploys),
            }
            for c in model.containers
        ],
        "registrations": [
            {"kind": r.kind.value, "name": str(r.name), "registered": _refs(r.registered)}
            for r in model.registrations
        ],
    }


def dumps_document(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def canonical_serialize(model: Model) -> bytes:
    return dumps_document(model_to_document(model)).encode("utf-8")


# -- loading ----------------------------------------------------------------


class _Reader:
    """Typed accessors over a decoded document that fail with MalformedDocument."""

    def __init__(self, obj: Any, where: str):
        if not isinstance(obj, dict):
            raise MalformedDocument(f"{where}: expected an object")
        self.obj = obj
        self.where = where

    def get(self, key: str, kind: type | tuple = object, optional: bool = False) -> Any:
        if key not in self.obj:
            if optional:
                return None
            raise MalformedDocument(f"{self.where}: missing key {key!r}")
        value = self.obj[key]
        if value is None and optional:
            return None
        if kind is int and isinstance(value, bool):
            raise MalformedDocument(f"{self.where}.{key}: expected an integer")
        if not isinstance(value, kind):
            raise MalformedDocument(f"{self.where}.{key}: unexpected value {value!r}")
        return value

    def items(self, key: str) -> list["_Reader"]:
        return [_Reader(v, f"{self.where}.{key}[{i}]") for i, v in enumerate(self.get(key, list))]

    def text(self, key: str) -> str:
        return self.get(key, str)

    def qname(self, key: str) -> QualifiedName:
        return _qname(self.text(key), f"{self.where}.{key}")

    def ref(self, key: str, optional: bool = False) -> Optional[Ref]:
        value = self.get(key, str, optional=optional)
        if value is None:
            return None
        return Ref(_qname(value, f"{self.where}.{key}"))

    def refs(self, key: str) -> tuple[Ref, ...]:
        values = self.get(key, list)
        out = []
        for i, v in enumerate(values):
            if not isinstance(v, str):
                raise MalformedDocument(f"{self.where}.{key}[{i}]: expected a name")
            out.append(Ref(_qname(v, f"{self.where}.{key}[{i}]")))
        return tuple(out)

    def enum(self, key: str, enum_type):
        value = self.text(key)
        try:
            return enum_type(value)
        except ValueError:
            raise MalformedDocument(f"{self.where}.{key}: unknown value {value!r}") from None


def _qname(text: str, where: str) -> QualifiedName:
    try:
        return QualifiedName.parse(text)
    except ValueError as exc:
        raise MalformedDocument(f"{where}: {exc}") from None


def _name(r: _Reader, key: str = "name") -> str:
    value = r.text(key)
    if not is_identifier(value):
        raise MalformedDocument(f"{r.where}.{key}: invalid identifier {value!r}")
    return value


def _read_type(r: _Reader, key: str) -> Union[PrimitiveType, Ref]:
    t = _Reader(r.get(key, dict), f"{r.where}.{key}")
    if "primitive" in t.obj:
        return t.enum("primitive", PrimitiveType)
    return t.ref("ref")  # type: ignore[return-value]


def _read_field(r: _Reader):
    name = _name(r)
    if "primitive" in r.obj:
        return DataField(name, r.enum("primitive", PrimitiveType))
    if "object" in r.obj:
        return DataObjectField(name, r.ref("object"))
    if "list" in r.obj:
        return DataObjectField(name, r.ref("list"), is_list=True)
    raise MalformedDocument(f"{r.where}: field has no type")


def document_to_model(doc: Any) -> Model:
    root = _Reader(doc, "$")
    if root.get("version", str) != FORMAT_VERSION:
        raise MalformedDocument(f"unsupported document version {root.obj.get('version')!r}")
    data = [
        DataModel(
            d.qname("namespace"),
            tuple(DataObject(_name(o), tuple(_read_field(f) for f in o.items("fields")))
                  for o in d.items("dataObjects")),
            tuple(ListType(_name(lt), _read_type(lt, "element")) for lt in d.items("listTypes")),
        )
        for d in root.items("data")
    ]
    services = [
        Microservice(
            s.qname("name"),
            s.enum("type", MicroserviceType),
            tuple(
                ServiceInterface(
                    _name(i),
                    tuple(
                        ServiceOperation(
                            _name(op),
                            tuple(
                                Parameter(
                                    _name(p),
                                    p.enum("pattern", CommPattern),
                                    p.enum("commType", CommType),
                                    _read_type(p, "dataType"),
                                    p.ref("initializedBy", optional=True),
                                )
                                for p in op.items("parameters")
                            ),
                            op.get("notImplemented", bool),
                        )
                        for op in i.items("operations")
                    ),
                )
                for i in s.items("interfaces")
            ),
            tuple(
                ServiceContract(_name(c), c.refs("provides"), c.refs("requires"))
                for c in s.items("contracts")
            ),
        )
        for s in root.items("services")
    ]
    technologies = [TechnologyDescriptor(t.qname("name"), t.enum("kind", TechnologyKind)) for t in root.items("technologies")]
    artifacts = []
    for a in root.items("artifacts"):
        st = a.get("serviceTechnology", (str, list))
        service_refs = (a.ref("serviceTechnology"),) if isinstance(st, str) else a.refs("serviceTechnology")
        artifacts.append(
            ServiceDeploymentArtifact(
                a.qname("name"),
                a.refs("contracts"),
                service_refs,
                a.ref("loadBalancer", optional=True),
                a.ref("circuitBreaker", optional=True),
                tuple(
                    Endpoint(
                        e.text("address"),
                        e.ref("protocol"),
                        e.ref("format"),
                        e.ref("operation", optional=True),
                        e.ref("contract", optional=True),
                    )
                    for e in a.items("endpoints")
                ),
            )
        )
    containers = []
    for c in root.items("containers"):
        env = _Reader(c.get("environment", dict), f"{c.where}.environment")
        containers.append(
            Container(
                c.qname("name"),
                OperatingEnvironment(env.text("name"), env.refs("containerTechnologies"), env.refs("serviceTechnologies")),
                c.get("minInstances", int),
                c.get("maxInstances", int),
                c.refs("deploys"),
            )
        )
    registrations = [
        DiscoverabilityRegistration(r.enum("kind", RegistrationKind), r.qname("name"), r.refs("registered"))
        for r in root.items("registrations")
    ]
    return Model(tuple(data), tuple(services), tuple(technologies), tuple(artifacts), tuple(containers), tuple(registrations))


def canonical_deserialize(data: Union[bytes, str]) -> Model:
    """Load a canonical document and re-check every model invariant.

    Raises MalformedDocument for syntax or schema errors, DanglingReference when
    a reference has no target of the expected kind, and InvariantViolation
    (carrying the rule code) for any other broken invariant.
    """
    from .validator import check_invariants

    try:
        text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
        doc = json.loads(text)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedDocument(f"not a JSON document: {exc}") from None
    model = document_to_model(doc)
    for ref, slot in dangling_references(model):
        raise DanglingReference(str(ref.name), f"reference {ref.name} ({slot}) has no valid target")
    for d in check_invariants(model):
        raise InvariantViolation(d.message, rule=d.code)
    return model
