"""Import resolution and cross-viewpoint reference binding.

Names written in a file resolve, in this order:

1. relative to each enclosing scope, innermost first (operation's interface,
   microservice, then the file namespace), among the file and its imports;
2. through an import alias: ``alias.Rest`` names ``Rest`` in the imported file;
3. as an absolute name inside the file's own namespace.
"""

from __future__ import annotations

import os
import posixpath
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, Sequence

import networkx as nx

from .diagnostics import Diagnostic, SourceSpan, sort_diagnostics
from .errors import FileNotFound, ImportCycle, LinkError, ParseFailed, ViewpointLayerViolation
from .model import (
    REFERENCE_TARGETS,
    Container,
    DataModel,
    DataObject,
    DataObjectField,
    DiscoverabilityRegistration,
    ListType,
    Microservice,
    Model,
    QualifiedName,
    Ref,
    ServiceDeploymentArtifact,
    TechnologyDescriptor,
)
from .parser import ParseUnit, Viewpoint, parse_source, viewpoint_of

Loader = Callable[[str], str]

ALLOWED_IMPORTS = {
    Viewpoint.DATA: {Viewpoint.DATA},
    Viewpoint.SERVICE: {Viewpoint.DATA, Viewpoint.SERVICE},
    Viewpoint.OPERATION: {Viewpoint.SERVICE, Viewpoint.OPERATION},
}


def canonical_path(path: str) -> str:
    return posixpath.normpath(path.replace(os.sep, "/"))


def import_target(importer: str, path: str) -> str:
    return canonical_path(posixpath.join(posixpath.dirname(importer), path))


def read_file(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


@dataclass(frozen=True)
class ImportGraph:
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]
    order: tuple[str, ...]
    units: dict = field(default_factory=dict, compare=False, repr=False)


def resolve_imports(entry_files: Iterable[str], loader: Optional[Loader] = None) -> ImportGraph:
    """Load and parse the transitive import closure of ``entry_files``.

    The returned order lists every file after the files it imports, with ties
    broken by path. Files whose namespace header is missing are parsed but
    their imports are not followed.
    """
    loader = loader or read_file
    units: dict[str, ParseUnit] = {}
    edges: set[tuple[str, str]] = set()
    pending = [(canonical_path(p), None) for p in sorted(set(entry_files))]
    while pending:
        path, span = pending.pop()
        if path in units:
            continue
        try:
            source = loader(path)
        except (FileNotFoundError, IsADirectoryError, NotADirectoryError):
            msg = f"cannot find model file {path!r}"
            raise FileNotFound(path, [Diagnostic("P105", msg, span)]) from None
        unit = parse_source(source, path)
        units[path] = unit
        if unit.fatal:
            continue
        for imp in unit.imports:
            target = import_target(path, imp.path)
            vp = viewpoint_of(target)
            if vp not in ALLOWED_IMPORTS[unit.viewpoint]:
                what = vp.value.lower() if vp else "unrecognized"
                msg = f"a {unit.viewpoint.value.lower()} model cannot import a {what} model ({imp.path!r})"
                raise ViewpointLayerViolation([Diagnostic("P106", msg, imp.span)])
            edges.add((path, target))
            pending.append((target, imp.span))

    graph = nx.DiGraph()
    graph.add_nodes_from(units)
    graph.add_edges_from(edges)
    try:
        cycle_edges = nx.find_cycle(graph)
    except nx.NetworkXNoCycle:
        pass
    else:
        cycle = [u for u, _ in cycle_edges]
        k = cycle.index(min(cycle))
        cycle = cycle[k:] + cycle[:k]
        first_import = next(i for i in units[cycle[0]].imports if import_target(cycle[0], i.path) == (cycle + cycle[:1])[1])
        msg = "import cycle: " + " -> ".join(cycle + cycle[:1])
        raise ImportCycle(cycle, [Diagnostic("P104", msg, first_import.span)])
    order = tuple(nx.lexicographical_topological_sort(graph.reverse(copy=False), key=str))
    return ImportGraph(tuple(sorted(units)), tuple(sorted(edges)), order, units)


# -- binding ----------------------------------------------------------------


@dataclass
class _Symbol:
    element: object
    file: str
    span: Optional[SourceSpan]


def edit_distance(a: str, b: str) -> int:
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


_ARTICLE = {
    "DataObject": "a structure",
    "ListType": "a list type",
    "ServiceOperation": "an operation",
    "ServiceInterface": "an interface",
    "ServiceContract": "a contract",
    "TechnologyDescriptor": "a technology",
    "ServiceDeploymentArtifact": "an artifact",
}


def _expected(slot: str) -> str:
    return " or ".join(_ARTICLE.get(t.__name__, t.__name__) for t in REFERENCE_TARGETS[slot])


class _Linker:
    def __init__(self, units: Sequence[ParseUnit]):
        self.units = list(units)
        self.by_file = {u.file: u for u in self.units}
        self.table: dict[QualifiedName, _Symbol] = {}
        self.diags: list[Diagnostic] = []

    # symbol registration

    def define(self, qn: QualifiedName, element, unit: ParseUnit, quiet: bool = False) -> None:
        span = getattr(element, "span", None)
        if qn in self.table:
            if not quiet:
                first = self.table[qn]
                related = (first.span,) if first.span else ()
                self.diags.append(Diagnostic("P102", f"duplicate definition of {qn}", span, related))
            return
        self.table[qn] = _Symbol(element, unit.file, span)

    def register(self, unit: ParseUnit) -> None:
        ns = unit.namespace
        for decl in unit.declarations:
            if isinstance(decl, DataObject):
                oqn = ns.child(decl.name)
                self.define(oqn, decl, unit)
                for f in decl.fields:
                    # duplicate field names are reported by the validator (D001)
                    self.define(oqn.child(f.name), f, unit, quiet=True)
            elif isinstance(decl, ListType):
                self.define(ns.child(decl.name), decl, unit)
            elif isinstance(decl, Microservice):
                sqn = ns.join(decl.name)
                self.define(sqn, decl, unit)
                for iface in decl.interfaces:
                    iqn = sqn.child(iface.name)
                    self.define(iqn, iface, unit)
                    for op in iface.operations:
                        oqn = iqn.child(op.name)
                        self.define(oqn, op, unit)
                        for p in op.parameters:
                            self.define(oqn.child(p.name), p, unit)
                for c in decl.contracts:
                    self.define(sqn.child(c.name), c, unit)
            else:
                self.define(ns.join(decl.name), decl, unit)

    # lookup

    def context(self, unit: ParseUnit) -> tuple[set[str], dict[str, ParseUnit]]:
        visible = {unit.file}
        aliases: dict[str, ParseUnit] = {}
        for imp in unit.imports:
            target = self.by_file.get(import_target(unit.file, imp.path))
            if target is None:
                self.diags.append(Diagnostic("P105", f"imported file {imp.path!r} was not loaded", imp.span))
                continue
            visible.add(target.file)
            aliases.setdefault(imp.alias, target)
        return visible, aliases

    def lookup(self, written: QualifiedName, unit: ParseUnit, scopes: Sequence[QualifiedName],
               visible: set[str], aliases: dict[str, ParseUnit]) -> Optional[QualifiedName]:
        for scope in scopes:
            cand = scope.join(written)
            sym = self.table.get(cand)
            if sym is not None and sym.file in visible:
                return cand
        head = written.segments[0]
        if head in aliases and len(written) > 1:
            target = aliases[head]
            cand = target.namespace.join(QualifiedName(written.segments[1:]))
            sym = self.table.get(cand)
            if sym is not None and sym.file == target.file:
                return cand
        if written.startswith(unit.namespace):
            sym = self.table.get(written)
            if sym is not None and sym.file in visible:
                return written
        return None

    def suggestions(self, written, slot, unit, scopes, visible, aliases) -> list[str]:
        kinds = REFERENCE_TARGETS[slot]
        parent = written.parent
        parents: Optional[list[QualifiedName]]
        if parent is None:
            parents = list(scopes)
        else:
            found = self.lookup(parent, unit, scopes, visible, aliases)
            parents = [found] if found is not None else None
        scored = set()
        for qn, sym in self.table.items():
            if sym.file not in visible:
                continue
            if not isinstance(sym.element, kinds):
                continue
            if parents is not None and qn.parent not in parents:
                continue
            d = edit_distance(written.last, qn.last)
            if 0 < d <= 2:
                scored.add((d, qn.last))
        return [name for _, name in sorted(scored)[:3]]

    def bind(self, ref: Ref, slot: str, unit: ParseUnit, scopes, visible, aliases) -> Ref:
        qn = self.lookup(ref.name, unit, scopes, visible, aliases)
        if qn is None:
            hint = self.suggestions(ref.name, slot, unit, scopes, visible, aliases)
            msg = f"unresolved reference {str(ref.name)!r}, expected {_expected(slot)}"
            if hint:
                msg += " (did you mean " + ", ".join(repr(h) for h in hint) + "?)"
            self.diags.append(Diagnostic("P101", msg, ref.span))
            return ref
        element = self.table[qn].element
        if not isinstance(element, REFERENCE_TARGETS[slot]):
            msg = f"{qn} is a {type(element).__name__}, expected {_expected(slot)}"
            self.diags.append(Diagnostic("P103", msg, ref.span, (self.table[qn].span,) if self.table[qn].span else ()))
        return Ref(qn, ref.span)

    # rewriting

    def rewrite(self, unit: ParseUnit) -> list:
        visible, aliases = self.context(unit)
        ns = unit.namespace

        def b(ref: Optional[Ref], slot: str, scopes=(ns,)) -> Optional[Ref]:
            return None if ref is None else self.bind(ref, slot, unit, scopes, visible, aliases)

        def bs(refs, slot: str, scopes=(ns,)) -> tuple[Ref, ...]:
            return tuple(b(r, slot, scopes) for r in refs)

        out = []
        for decl in unit.declarations:
            if isinstance(decl, DataObject):
                fields = tuple(
                    replace(f, target=b(f.target, "list-field" if f.is_list else "field"))
                    if isinstance(f, DataObjectField) else f
                    for f in decl.fields
                )
                out.append(replace(decl, fields=fields))
            elif isinstance(decl, ListType):
                element = decl.element if not isinstance(decl.element, Ref) else b(decl.element, "list-element")
                out.append(replace(decl, element=element))
            elif isinstance(decl, Microservice):
                sqn = ns.join(decl.name)
                interfaces = []
                for iface in decl.interfaces:
                    scopes = (sqn.child(iface.name), sqn, ns)
                    ops = []
                    for op in iface.operations:
                        params = tuple(
                            replace(
                                p,
                                data_type=b(p.data_type, "parameter-type", scopes) if isinstance(p.data_type, Ref) else p.data_type,
                                initialized_by=b(p.initialized_by, "initializer", scopes),
                            )
                            for p in op.parameters
                        )
                        ops.append(replace(op, parameters=params))
                    interfaces.append(replace(iface, operations=tuple(ops)))
                contracts = tuple(
                    replace(c, provides=bs(c.provides, "interface", (sqn, ns)), requires=bs(c.requires, "interface", (sqn, ns)))
                    for c in decl.contracts
                )
                out.append(replace(decl, name=sqn, interfaces=tuple(interfaces), contracts=contracts))
            elif isinstance(decl, TechnologyDescriptor):
                out.append(replace(decl, name=ns.join(decl.name)))
            elif isinstance(decl, ServiceDeploymentArtifact):
                endpoints = tuple(
                    replace(
                        e,
                        protocol=b(e.protocol, "technology"),
                        format=b(e.format, "technology"),
                        operation=b(e.operation, "operation"),
                        contract=b(e.contract, "contract"),
                    )
                    for e in decl.endpoints
                )
                out.append(
                    replace(
                        decl,
                        name=ns.join(decl.name),
                        contracts=bs(decl.contracts, "contract"),
                        service_technologies=bs(decl.service_technologies, "technology"),
                        load_balancer=b(decl.load_balancer, "technology"),
                        circuit_breaker=b(decl.circuit_breaker, "technology"),
                        endpoints=endpoints,
                    )
                )
            elif isinstance(decl, Container):
                env = decl.environment
                env = replace(
                    env,
                    container_technologies=bs(env.container_technologies, "technology"),
                    service_technologies=bs(env.service_technologies, "technology"),
                )
                out.append(replace(decl, name=ns.join(decl.name), environment=env, deploys=bs(decl.deploys, "artifact")))
            elif isinstance(decl, DiscoverabilityRegistration):
                out.append(replace(decl, name=ns.join(decl.name), registered=bs(decl.registered, "artifact")))
        return out

    def link(self) -> Model:
        for unit in self.units:
            self.register(unit)
        rewritten = {u.file: self.rewrite(u) for u in self.units}
        if self.diags:
            raise LinkError(sort_diagnostics(self.diags))

        data: dict[QualifiedName, DataModel] = {}
        services, techs, artifacts, containers, registrations = [], [], [], [], []
        for unit in self.units:
            decls = rewritten[unit.file]
            if unit.viewpoint is Viewpoint.DATA:
                dm = data.get(unit.namespace, DataModel(unit.namespace))
                data[unit.namespace] = replace(
                    dm,
                    data_objects=dm.data_objects + tuple(d for d in decls if isinstance(d, DataObject)),
                    list_types=dm.list_types + tuple(d for d in decls if isinstance(d, ListType)),
                )
            for d in decls:
                if isinstance(d, Microservice):
                    services.append(d)
                elif isinstance(d, TechnologyDescriptor):
                    techs.append(d)
                elif isinstance(d, ServiceDeploymentArtifact):
                    artifacts.append(d)
                elif isinstance(d, Container):
                    containers.append(d)
                elif isinstance(d, DiscoverabilityRegistration):
                    registrations.append(d)
        return Model(
            tuple(data.values()), tuple(services), tuple(techs), tuple(artifacts), tuple(containers), tuple(registrations)
        )


def link(units: Sequence[ParseUnit]) -> Model:
    """Bind every reference across ``units`` and assemble the immutable Model.

    ``units`` should be in import order. Raises ParseFailed when a unit carries
    parse errors, and LinkError listing every unresolved reference (P101),
    duplicate definition (P102) and metatype mismatch (P103).
    """
    parse_errors = [d for u in units for d in u.diagnostics if d.is_error]
    if parse_errors:
        raise ParseFailed(sort_diagnostics(parse_errors))
    return _Linker(units).link()


def load_model(entry_files: Iterable[str], loader: Optional[Loader] = None) -> Model:
    """Parse the import closure of ``entry_files`` and link it into a Model."""
    graph = resolve_imports(entry_files, loader)
    return link([graph.units[p] for p in graph.order])


def dict_loader(sources: dict[str, str]) -> Loader:
    """A loader over in-memory sources keyed by path."""
    normalized = {canonical_path(k): v for k, v in sources.items()}

    def load(path: str) -> str:
        try:
            return normalized[canonical_path(path)]
        except KeyError:
            raise FileNotFoundError(path) from None

    return load
