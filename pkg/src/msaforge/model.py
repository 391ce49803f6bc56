"""In-memory metamodel for the Data, Service and Operation viewpoints.

Every element is a frozen dataclass. Source spans never take part in equality,
so two models built from differently formatted sources compare equal when their
content does. References are :class:`Ref` values holding a qualified name; the
linker rewrites them to absolute names and :class:`Model` indexes every named
element in a symbol table.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .diagnostics import SourceSpan

IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z0-9_]+)*\Z")


def is_identifier(text: str) -> bool:
    return IDENTIFIER.match(text) is not None


@dataclass(frozen=True)
class QualifiedName:
    segments: tuple[str, ...]

    def __post_init__(self) -> None:
        segs = tuple(self.segments)
        if not segs:
            raise ValueError("qualified name needs at least one segment")
        for s in segs:
            if not isinstance(s, str) or not is_identifier(s):
                raise ValueError(f"invalid name segment {s!r}")
        object.__setattr__(self, "segments", segs)

    @classmethod
    def parse(cls, text: str) -> "QualifiedName":
        return cls(tuple(text.split(".")))

    @classmethod
    def of(cls, value: Union[str, "QualifiedName"]) -> "QualifiedName":
        return value if isinstance(value, QualifiedName) else cls.parse(value)

    def __str__(self) -> str:
        return ".".join(self.segments)

    def __len__(self) -> int:
        return len(self.segments)

    @property
    def last(self) -> str:
        return self.segments[-1]

    @property
    def parent(self) -> Optional["QualifiedName"]:
        if len(self.segments) == 1:
            return None
        return QualifiedName(self.segments[:-1])

    def child(self, *names: str) -> "QualifiedName":
        return QualifiedName(self.segments + names)

    def join(self, other: "QualifiedName") -> "QualifiedName":
        return QualifiedName(self.segments + other.segments)

    def startswith(self, prefix: "QualifiedName") -> bool:
        return self.segments[: len(prefix.segments)] == prefix.segments


def _span() -> Optional[SourceSpan]:
    return field(default=None, compare=False, repr=False)


class PrimitiveType(str, enum.Enum):
    BOOLEAN = "boolean"
    INT = "int"
    FLOAT = "float"
    STRING = "string"
    DATE = "date"


class CommPattern(str, enum.Enum):
    IN_ONLY = "IN_ONLY"
    OUT_ONLY = "OUT_ONLY"
    INOUT = "INOUT"

    @property
    def receives(self) -> bool:
        return self is not CommPattern.OUT_ONLY

    @property
    def provides(self) -> bool:
        return self is not CommPattern.IN_ONLY


class CommType(str, enum.Enum):
    SYNC = "SYNC"
    ASYNC = "ASYNC"


class MicroserviceType(str, enum.Enum):
    FUNCTIONAL = "FUNCTIONAL"
    INFRASTRUCTURE = "INFRASTRUCTURE"


class TechnologyKind(str, enum.Enum):
    SERVICE = "SERVICE"
    CONTAINER = "CONTAINER"
    PROTOCOL = "PROTOCOL"
    MESSAGE_FORMAT = "MESSAGE_FORMAT"
    LOAD_BALANCER = "LOAD_BALANCER"
    CIRCUIT_BREAKER = "CIRCUIT_BREAKER"


class RegistrationKind(str, enum.Enum):
    SERVICE_DISCOVERY = "SERVICE_DISCOVERY"
    API_GATEWAY = "API_GATEWAY"


@dataclass(frozen=True)
class Ref:
    """A by-name reference to another model element."""

    name: QualifiedName
    span: Optional[SourceSpan] = _span()

    def __str__(self) -> str:
        return str(self.name)


def _refset(refs) -> tuple[Ref, ...]:
    # sets of references: deduplicated, ordered by name
    return tuple(sorted(dict.fromkeys(refs), key=lambda r: str(r.name)))


# -- Data viewpoint ---------------------------------------------------------


@dataclass(frozen=True)
class DataField:
    name: str
    type: PrimitiveType
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class DataObjectField:
    """A field whose value is another structure, or a list type when ``is_list`` is set."""

    name: str
    target: Ref
    is_list: bool = False
    span: Optional[SourceSpan] = _span()


Field = Union[DataField, DataObjectField]


@dataclass(frozen=True)
class DataObject:
    name: str
    fields: tuple[Field, ...]
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class ListType:
    name: str
    element: Union[PrimitiveType, Ref]
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class DataModel:
    namespace: QualifiedName
    data_objects: tuple[DataObject, ...] = ()
    list_types: tuple[ListType, ...] = ()
    span: Optional[SourceSpan] = _span()


# -- Service viewpoint ------------------------------------------------------


@dataclass(frozen=True)
class Parameter:
    name: str
    pattern: CommPattern
    comm_type: CommType
    data_type: Union[PrimitiveType, Ref]
    initialized_by: Optional[Ref] = None
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class ServiceOperation:
    name: str
    parameters: tuple[Parameter, ...] = ()
    not_implemented: bool = False
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class ServiceInterface:
    name: str
    operations: tuple[ServiceOperation, ...] = ()
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class ServiceContract:
    name: str
    provides: tuple[Ref, ...]
    requires: tuple[Ref, ...] = ()
    span: Optional[SourceSpan] = _span()

    def __post_init__(self) -> None:
        object.__setattr__(self, "provides", _refset(self.provides))
        object.__setattr__(self, "requires", _refset(self.requires))


@dataclass(frozen=True)
class Microservice:
    name: QualifiedName
    type: MicroserviceType
    interfaces: tuple[ServiceInterface, ...] = ()
    contracts: tuple[ServiceContract, ...] = ()
    span: Optional[SourceSpan] = _span()


# -- Operation viewpoint ----------------------------------------------------


@dataclass(frozen=True)
class TechnologyDescriptor:
    name: QualifiedName
    kind: TechnologyKind
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Endpoint:
    address: str
    protocol: Ref
    format: Ref
    operation: Optional[Ref] = None
    contract: Optional[Ref] = None
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class ServiceDeploymentArtifact:
    name: QualifiedName
    contracts: tuple[Ref, ...]
    service_technologies: tuple[Ref, ...]
    load_balancer: Optional[Ref] = None
    circuit_breaker: Optional[Ref] = None
    endpoints: tuple[Endpoint, ...] = ()
    span: Optional[SourceSpan] = _span()

    def __post_init__(self) -> None:
        object.__setattr__(self, "contracts", _refset(self.contracts))
        object.__setattr__(self, "service_technologies", _refset(self.service_technologies))

    @property
    def service_technology(self) -> Optional[Ref]:
        """The single assigned service technology, or None when there is not exactly one."""
        if len(self.service_technologies) == 1:
            return self.service_technologies[0]
        return None


@dataclass(frozen=True)
class OperatingEnvironment:
    name: str
    container_technologies: tuple[Ref, ...]
    service_technologies: tuple[Ref, ...]
    span: Optional[SourceSpan] = _span()

    def __post_init__(self) -> None:
        object.__setattr__(self, "container_technologies", _refset(self.container_technologies))
        object.__setattr__(self, "service_technologies", _refset(self.service_technologies))


@dataclass(frozen=True)
class Container:
    name: QualifiedName
    environment: OperatingEnvironment
    min_instances: int
    max_instances: int
    deploys: tuple[Ref, ...]
    span: Optional[SourceSpan] = _span()

    def __post_init__(self) -> None:
        object.__setattr__(self, "deploys", _refset(self.deploys))


@dataclass(frozen=True)
class DiscoverabilityRegistration:
    kind: RegistrationKind
    name: QualifiedName
    registered: tuple[Ref, ...]
    span: Optional[SourceSpan] = _span()

    def __post_init__(self) -> None:
        object.__setattr__(self, "registered", _refset(self.registered))


Element = Union[
    DataObject, DataField, DataObjectField, ListType,
    Microservice, ServiceInterface, ServiceOperation, Parameter, ServiceContract,
    TechnologyDescriptor, ServiceDeploymentArtifact, Container, DiscoverabilityRegistration,
]


# -- the linked model -------------------------------------------------------


def _by_name(items, key=lambda x: str(x.name)) -> tuple:
    return tuple(sorted(items, key=key))


@dataclass(frozen=True)
class Model:
    """The linked union of all three viewpoints.

    Top-level collections are kept sorted by qualified name so that models
    assembled in different orders compare (and serialize) identically.
    """

    data_models: tuple[DataModel, ...] = ()
    microservices: tuple[Microservice, ...] = ()
    technologies: tuple[TechnologyDescriptor, ...] = ()
    artifacts: tuple[ServiceDeploymentArtifact, ...] = ()
    containers: tuple[Container, ...] = ()
    registrations: tuple[DiscoverabilityRegistration, ...] = ()
    symbols: dict = field(init=False, compare=False, repr=False, hash=False)
    _names: dict = field(init=False, compare=False, repr=False, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "data_models", _by_name(self.data_models, key=lambda d: str(d.namespace)))
        for attr in ("microservices", "technologies", "artifacts", "containers", "registrations"):
            object.__setattr__(self, attr, _by_name(getattr(self, attr)))
        symbols: dict[QualifiedName, Element] = {}
        names: dict[int, QualifiedName] = {}
        for qn, element in iter_named(self):
            names.setdefault(id(element), qn)
            symbols.setdefault(qn, element)
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "_names", names)

    def resolve(self, name: Union[str, QualifiedName]) -> Optional[Element]:
        try:
            qn = QualifiedName.of(name)
        except ValueError:
            return None
        return self.symbols.get(qn)

    def qualified_name(self, element: Element) -> QualifiedName:
        return self._names[id(element)]

    def owner_service(self, name: Union[str, QualifiedName]) -> Optional[Microservice]:
        """The microservice enclosing the element named ``name`` (or the service itself)."""
        qn: Optional[QualifiedName] = QualifiedName.of(name)
        while qn is not None:
            element = self.symbols.get(qn)
            if isinstance(element, Microservice):
                return element
            qn = qn.parent
        return None

    def technology(self, ref: Optional[Ref]) -> Optional[TechnologyDescriptor]:
        if ref is None:
            return None
        element = self.symbols.get(ref.name)
        return element if isinstance(element, TechnologyDescriptor) else None


def iter_named(model: Model) -> Iterator[tuple[QualifiedName, Element]]:
    """Every named element with its qualified name, in a fixed traversal order."""
    for dm in model.data_models:
        for obj in dm.data_objects:
            oqn = dm.namespace.child(obj.name)
            yield oqn, obj
            for f in obj.fields:
                yield oqn.child(f.name), f
        for lt in dm.list_types:
            yield dm.namespace.child(lt.name), lt
    for svc in model.microservices:
        yield svc.name, svc
        for iface in svc.interfaces:
            iqn = svc.name.child(iface.name)
            yield iqn, iface
            for op in iface.operations:
                opqn = iqn.child(op.name)
                yield opqn, op
                for p in op.parameters:
                    yield opqn.child(p.name), p
        for c in svc.contracts:
            yield svc.name.child(c.name), c
    for group in (model.technologies, model.artifacts, model.containers, model.registrations):
        for element in group:
            yield element.name, element


REFERENCE_TARGETS = {
    "field": (DataObject,),
    "list-field": (ListType,),
    "list-element": (DataObject,),
    "parameter-type": (DataObject, ListType),
    "initializer": (ServiceOperation,),
    "interface": (ServiceInterface,),
    "contract": (ServiceContract,),
    "operation": (ServiceOperation,),
    "technology": (TechnologyDescriptor,),
    "artifact": (ServiceDeploymentArtifact,),
}


def iter_references(model: Model) -> Iterator[tuple[Ref, str]]:
    """Every reference in the model paired with its slot (a key of ``REFERENCE_TARGETS``)."""
    for dm in model.data_models:
        for obj in dm.data_objects:
            for f in obj.fields:
                if isinstance(f, DataObjectField):
                    yield f.target, "list-field" if f.is_list else "field"
        for lt in dm.list_types:
            if isinstance(lt.element, Ref):
                yield lt.element, "list-element"
    for svc in model.microservices:
        for iface in svc.interfaces:
            for op in iface.operations:
                for p in op.parameters:
                    if isinstance(p.data_type, Ref):
                        yield p.data_type, "parameter-type"
                    if p.initialized_by is not None:
                        yield p.initialized_by, "initializer"
        for c in svc.contracts:
            for r in c.provides + c.requires:
                yield r, "interface"
    for a in model.artifacts:
        for r in a.contracts:
            yield r, "contract"
        for r in a.service_technologies:
            yield r, "technology"
        for r in (a.load_balancer, a.circuit_breaker):
            if r is not None:
                yield r, "technology"
        for e in a.endpoints:
            yield e.protocol, "technology"
            yield e.format, "technology"
            if e.operation is not None:
                yield e.operation, "operation"
            if e.contract is not None:
                yield e.contract, "contract"
    for c in model.containers:
        for r in c.environment.container_technologies + c.environment.service_technologies:
            yield r, "technology"
        for r in c.deploys:
            yield r, "artifact"
    for reg in model.registrations:
        for r in reg.registered:
            yield r, "artifact"


def dangling_references(model: Model) -> list[tuple[Ref, str]]:
    """References whose target is missing or of the wrong metatype."""
    out = []
    for ref, slot in iter_references(model):
        if not isinstance(model.symbols.get(ref.name), REFERENCE_TARGETS[slot]):
            out.append((ref, slot))
    return out


def resolve(model: Model, name: Union[str, QualifiedName]) -> Optional[Element]:
    """Look up an element by qualified name; None when absent."""
    return model.resolve(name)


def structural_equals(a: Model, b: Model) -> bool:
    """Equality of content, ignoring source spans and file paths."""
    return a == b
