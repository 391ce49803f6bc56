"""Recursive-descent parsers for the ``.msad``, ``.msas`` and ``.msao`` languages.

Each parser turns a token stream into a :class:`ParseUnit` whose declarations
are unlinked model elements: references hold the names exactly as written.
Parsing never aborts. A syntax error produces one diagnostic, the enclosing
top-level declaration is dropped, and parsing resumes at the next top-level
keyword or after the matching closing brace.
"""

from __future__ import annotations

import enum
import posixpath
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .diagnostics import Diagnostic, SourceSpan
from .lexer import Token, TokenKind, string_value, tokenize_tolerant
from .model import (
    CommPattern,
    CommType,
    Container,
    DataField,
    DataObject,
    DataObjectField,
    DiscoverabilityRegistration,
    Endpoint,
    ListType,
    Microservice,
    MicroserviceType,
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
)


class Viewpoint(str, enum.Enum):
    DATA = "DATA"
    SERVICE = "SERVICE"
    OPERATION = "OPERATION"


EXTENSIONS = {".msad": Viewpoint.DATA, ".msas": Viewpoint.SERVICE, ".msao": Viewpoint.OPERATION}

PRIMITIVES = {p.value: p for p in PrimitiveType}
PATTERNS = {"in": CommPattern.IN_ONLY, "out": CommPattern.OUT_ONLY, "inout": CommPattern.INOUT}
COMM_TYPES = {"sync": CommType.SYNC, "async": CommType.ASYNC}
SERVICE_TYPES = {"functional": MicroserviceType.FUNCTIONAL, "infrastructure": MicroserviceType.INFRASTRUCTURE}
TECH_KINDS = {
    "service": TechnologyKind.SERVICE,
    "container": TechnologyKind.CONTAINER,
    "protocol": TechnologyKind.PROTOCOL,
    "format": TechnologyKind.MESSAGE_FORMAT,
    "load-balancer": TechnologyKind.LOAD_BALANCER,
    "circuit-breaker": TechnologyKind.CIRCUIT_BREAKER,
}
REGISTRATION_KINDS = {"discovery": RegistrationKind.SERVICE_DISCOVERY, "gateway": RegistrationKind.API_GATEWAY}

STARTERS = {
    Viewpoint.DATA: frozenset({"structure", "list"}),
    Viewpoint.SERVICE: frozenset({"functional", "infrastructure", "microservice"}),
    Viewpoint.OPERATION: frozenset({"technology", "artifact", "container", "discovery", "gateway"}),
}

DataDecl = Union[DataObject, ListType]
OperationDecl = Union[TechnologyDescriptor, ServiceDeploymentArtifact, Container, DiscoverabilityRegistration]


@dataclass(frozen=True)
class Import:
    path: str
    alias: str
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ParseUnit:
    viewpoint: Viewpoint
    namespace: Optional[QualifiedName]
    imports: tuple[Import, ...] = ()
    declarations: tuple = ()
    diagnostics: tuple[Diagnostic, ...] = field(default=(), compare=False)
    file: str = field(default="<input>", compare=False)

    @property
    def fatal(self) -> bool:
        return self.namespace is None

    @property
    def has_errors(self) -> bool:
        return any(d.is_error for d in self.diagnostics)


def viewpoint_of(path: str) -> Optional[Viewpoint]:
    return EXTENSIONS.get(posixpath.splitext(path)[1])


class _Bail(Exception):
    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic


def _describe(tok: Token) -> str:
    if tok.kind is TokenKind.EOF:
        return "end of file"
    return f"{tok.kind.value} {tok.text!r}"


class _Parser:
    def __init__(self, tokens: Sequence[Token], viewpoint: Viewpoint):
        self.toks = [t for t in tokens if t.kind is not TokenKind.COMMENT]
        if not self.toks or self.toks[-1].kind is not TokenKind.EOF:
            raise ValueError("token stream must end with EOF")
        self.viewpoint = viewpoint
        self.i = 0
        self.diags: list[Diagnostic] = []
        self.file = self.toks[-1].span.file

    # -- token helpers ------------------------------------------------------

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        tok = self.peek()
        if tok.kind is not TokenKind.EOF:
            self.i += 1
        return tok

    @property
    def prev(self) -> Token:
        return self.toks[self.i - 1]

    def span_from(self, start: Token) -> SourceSpan:
        end = self.prev if self.i > 0 and self.prev.offset >= start.offset else start
        return start.span.to(end.span)

    def at_kw(self, *words: str) -> bool:
        tok = self.peek()
        return tok.kind is TokenKind.KEYWORD and tok.text in words

    def at_punct(self, text: str) -> bool:
        return self.peek().is_(TokenKind.PUNCT, text)

    def accept_kw(self, word: str) -> Optional[Token]:
        return self.advance() if self.at_kw(word) else None

    def accept_punct(self, text: str) -> Optional[Token]:
        return self.advance() if self.at_punct(text) else None

    def close_block(self) -> bool:
        """Consume a closing brace; a declaration keyword in column 1 means the brace is missing."""
        if self.accept_punct("}"):
            return True
        tok = self.peek()
        if tok.kind is TokenKind.KEYWORD and tok.text in STARTERS[self.viewpoint] and tok.span.start_col == 1:
            raise self.fail("'}'")
        return False

    def fail(self, expected: str, tok: Optional[Token] = None) -> "_Bail":
        tok = tok or self.peek()
        return _Bail(Diagnostic("P001", f"unexpected {_describe(tok)}, expected {expected}", tok.span))

    def expect_kw(self, *words: str) -> Token:
        if not self.at_kw(*words):
            raise self.fail(" or ".join(repr(w) for w in words))
        return self.advance()

    def expect_punct(self, text: str) -> Token:
        if not self.at_punct(text):
            raise self.fail(repr(text))
        return self.advance()

    def note(self, code: str, message: str, span: SourceSpan) -> None:
        self.diags.append(Diagnostic(code, message, span))

    def name(self, what: str = "a name") -> str:
        tok = self.peek()
        if tok.kind not in (TokenKind.IDENT, TokenKind.KEYWORD):
            raise self.fail(what)
        return self.advance().text

    def qname(self, what: str = "a qualified name") -> QualifiedName:
        parts = [self.name(what)]
        while self.at_punct(".") and self.peek(1).kind in (TokenKind.IDENT, TokenKind.KEYWORD):
            self.advance()
            parts.append(self.advance().text)
        return QualifiedName(tuple(parts))

    def ref(self, what: str = "a reference") -> Ref:
        start = self.peek()
        qn = self.qname(what)
        return Ref(qn, self.span_from(start))

    def refs(self, what: str = "a reference") -> list[Ref]:
        out = [self.ref(what)]
        while self.accept_punct(","):
            out.append(self.ref(what))
        return out

    def string(self, what: str = "a string") -> str:
        if self.peek().kind is not TokenKind.STRING_LIT:
            raise self.fail(what)
        return string_value(self.advance())

    def integer(self, what: str = "an integer") -> int:
        if self.peek().kind is not TokenKind.INT_LIT:
            raise self.fail(what)
        return int(self.advance().text)

    def at_primitive(self) -> bool:
        return self.at_kw(*PRIMITIVES) and not self.peek(1).is_(TokenKind.PUNCT, ".")

    # -- unit -------------------------------------------------------------

    def parse_unit(self) -> ParseUnit:
        namespace = None
        first = self.peek()
        if self.at_kw("namespace"):
            start = self.advance()
            try:
                namespace = self.qname("a namespace name")
            except _Bail as b:
                self.diags.append(b.diagnostic)
                self.recover(self.i - 1)
        else:
            self.note("P003", f"missing namespace header, found {_describe(first)}", first.span)
            if first.kind is TokenKind.EOF:
                return ParseUnit(self.viewpoint, None, diagnostics=tuple(self.diags), file=self.file)

        imports: list[Import] = []
        decls: list = []
        starters = STARTERS[self.viewpoint]
        while self.peek().kind is not TokenKind.EOF:
            start = self.i
            try:
                if self.at_kw("import"):
                    imports.append(self.import_())
                elif self.at_kw(*starters):
                    decls.append(self.declaration())
                else:
                    raise self.fail("a declaration")
            except _Bail as b:
                self.diags.append(b.diagnostic)
                self.recover(start)

        seen: dict[str, Import] = {}
        for imp in imports:
            if imp.alias in seen:
                self.note("P007", f"import alias {imp.alias!r} is already in use", imp.span)
            seen.setdefault(imp.alias, imp)
        return ParseUnit(self.viewpoint, namespace, tuple(imports), tuple(decls), tuple(self.diags), self.file)

    def recover(self, start: int) -> None:
        starters = STARTERS[self.viewpoint] | {"import", "namespace"}
        depth = 0
        for t in self.toks[start:self.i]:
            if t.is_(TokenKind.PUNCT, "{"):
                depth += 1
            elif t.is_(TokenKind.PUNCT, "}"):
                depth -= 1
        forced = self.i == start
        while self.peek().kind is not TokenKind.EOF:
            tok = self.peek()
            is_starter = tok.kind is TokenKind.KEYWORD and tok.text in starters
            if not forced and is_starter and (depth <= 0 or tok.span.start_col == 1):
                return
            forced = False
            self.advance()
            if tok.is_(TokenKind.PUNCT, "{"):
                depth += 1
            elif tok.is_(TokenKind.PUNCT, "}"):
                depth -= 1
                if depth <= 0:
                    return

    def import_(self) -> Import:
        start = self.expect_kw("import")
        path = self.string("an import path")
        self.expect_kw("as")
        alias = self.name("an import alias")
        return Import(path, alias, self.span_from(start))

    def declaration(self):
        if self.viewpoint is Viewpoint.DATA:
            return self.structure() if self.at_kw("structure") else self.list_type()
        if self.viewpoint is Viewpoint.SERVICE:
            return self.microservice()
        return self.operation_decl()

    # -- data ---------------------------------------------------------------

    def structure(self) -> DataObject:
        start = self.expect_kw("structure")
        name = self.name("a structure name")
        self.expect_punct("{")
        fields = []
        while not self.close_block():
            fields.append(self.data_field())
        return DataObject(name, tuple(fields), self.span_from(start))

    def data_field(self):
        start = self.peek()
        name = self.name("a field name or '}'")
        self.expect_punct(":")
        if self.at_primitive():
            return DataField(name, PRIMITIVES[self.advance().text], self.span_from(start))
        is_list = self.accept_kw("list") is not None
        target = self.ref("a field type")
        return DataObjectField(name, target, is_list, self.span_from(start))

    def list_type(self) -> ListType:
        start = self.expect_kw("list")
        name = self.name("a list name")
        self.expect_punct("{")
        self.expect_kw("element")
        element: Union[PrimitiveType, Ref]
        if self.at_primitive():
            element = PRIMITIVES[self.advance().text]
        else:
            element = self.ref("an element type")
        self.expect_punct("}")
        return ListType(name, element, self.span_from(start))

    # -- service ------------------------------------------------------------

    def microservice(self) -> Microservice:
        start = self.peek()
        kind = SERVICE_TYPES[self.expect_kw(*SERVICE_TYPES).text]
        self.expect_kw("microservice")
        name = self.qname("a microservice name")
        self.expect_punct("{")
        interfaces, contracts = [], []
        while not self.close_block():
            if self.at_kw("interface"):
                interfaces.append(self.interface())
            elif self.at_kw("contract"):
                contracts.append(self.contract())
            else:
                raise self.fail("'interface', 'contract' or '}'")
        return Microservice(name, kind, tuple(interfaces), tuple(contracts), self.span_from(start))

    def interface(self) -> ServiceInterface:
        start = self.expect_kw("interface")
        name = self.name("an interface name")
        self.expect_punct("{")
        ops = []
        while not self.close_block():
            ops.append(self.operation())
        return ServiceInterface(name, tuple(ops), self.span_from(start))

    def operation(self) -> ServiceOperation:
        start = self.peek()
        not_implemented = self.accept_kw("not-implemented") is not None
        if not self.at_kw("operation"):
            raise self.fail("'operation', 'not-implemented' or '}'")
        self.advance()
        name = self.name("an operation name")
        self.expect_punct("(")
        params = []
        if not self.accept_punct(")"):
            params.append(self.parameter())
            while self.accept_punct(","):
                params.append(self.parameter())
            self.expect_punct(")")
        return ServiceOperation(name, tuple(params), not_implemented, self.span_from(start))

    def parameter(self) -> Parameter:
        start = self.peek()
        pattern = PATTERNS[self.expect_kw(*PATTERNS).text]
        comm = COMM_TYPES[self.expect_kw(*COMM_TYPES).text]
        name = self.name("a parameter name")
        self.expect_punct(":")
        data_type: Union[PrimitiveType, Ref]
        if self.at_primitive():
            data_type = PRIMITIVES[self.advance().text]
        else:
            data_type = self.ref("a parameter type")
        initializer = None
        if self.accept_kw("initialized"):
            self.expect_kw("by")
            initializer = self.ref("an operation")
        return Parameter(name, pattern, comm, data_type, initializer, self.span_from(start))

    def contract(self) -> ServiceContract:
        start = self.expect_kw("contract")
        name = self.name("a contract name")
        self.expect_punct("{")
        clauses: dict[str, list[Ref]] = {}
        while not self.close_block():
            kw = self.expect_kw("provides", "requires")
            if kw.text in clauses:
                self.note("P005", f"duplicate {kw.text!r} clause", kw.span)
            clauses.setdefault(kw.text, []).extend(self.refs("an interface"))
        span = self.span_from(start)
        if "provides" not in clauses:
            self.note("P004", f"contract {name!r} must provide at least one interface", span)
        return ServiceContract(name, tuple(clauses.get("provides", ())), tuple(clauses.get("requires", ())), span)

    # -- operation ----------------------------------------------------------

    def operation_decl(self) -> OperationDecl:
        if self.at_kw("technology"):
            return self.technology()
        if self.at_kw("artifact"):
            return self.artifact()
        if self.at_kw("container"):
            return self.container()
        return self.registration()

    def technology(self) -> TechnologyDescriptor:
        start = self.expect_kw("technology")
        name = self.name("a technology name")
        self.expect_punct(":")
        kind = TECH_KINDS[self.expect_kw(*TECH_KINDS).text]
        return TechnologyDescriptor(QualifiedName((name,)), kind, self.span_from(start))

    def artifact(self) -> ServiceDeploymentArtifact:
        start = self.expect_kw("artifact")
        name = self.name("an artifact name")
        self.expect_punct("{")
        contracts: list[Ref] = []
        services: list[Ref] = []
        single: dict[str, Ref] = {}
        endpoints: list[Endpoint] = []
        seen_contracts = False
        while not self.close_block():
            kw = self.expect_kw("contracts", "service", "load-balancer", "circuit-breaker", "endpoint")
            if kw.text == "contracts":
                if seen_contracts:
                    self.note("P005", "duplicate 'contracts' clause", kw.span)
                seen_contracts = True
                contracts.extend(self.refs("a contract"))
            elif kw.text == "service":
                services.append(self.ref("a service technology"))
            elif kw.text == "endpoint":
                endpoints.append(self.endpoint(kw))
            else:
                if kw.text in single:
                    self.note("P005", f"duplicate {kw.text!r} clause", kw.span)
                single[kw.text] = self.ref("a technology")
        span = self.span_from(start)
        if not seen_contracts:
            self.note("P004", f"artifact {name!r} needs a 'contracts' clause", span)
        return ServiceDeploymentArtifact(
            QualifiedName((name,)),
            tuple(contracts),
            tuple(services),
            single.get("load-balancer"),
            single.get("circuit-breaker"),
            tuple(endpoints),
            span,
        )

    def endpoint(self, start: Token) -> Endpoint:
        addr_tok = self.peek()
        address = self.string("an endpoint address")
        if not address:
            self.note("P006", "endpoint address must not be empty", addr_tok.span)
        self.expect_kw("protocol")
        protocol = self.ref("a protocol technology")
        self.expect_kw("format")
        fmt = self.ref("a format technology")
        targets: dict[str, Ref] = {}
        if self.accept_kw("for"):
            kw = self.expect_kw("operation", "contract")
            targets[kw.text] = self.ref(f"an {kw.text}" if kw.text == "operation" else "a contract")
            other = "contract" if kw.text == "operation" else "operation"
            if self.accept_kw(other):
                targets[other] = self.ref("a target")
        return Endpoint(address, protocol, fmt, targets.get("operation"), targets.get("contract"), self.span_from(start))

    def container(self) -> Container:
        start = self.expect_kw("container")
        name = self.name("a container name")
        self.expect_punct("{")
        env: Optional[OperatingEnvironment] = None
        bounds: Optional[tuple[int, int]] = None
        deploys: Optional[list[Ref]] = None
        while not self.close_block():
            kw = self.expect_kw("environment", "instances", "deploys")
            duplicate = {"environment": env, "instances": bounds, "deploys": deploys}[kw.text] is not None
            if duplicate:
                self.note("P005", f"duplicate {kw.text!r} clause", kw.span)
            if kw.text == "environment":
                image_tok = self.peek()
                image = self.string("a container image name")
                if not image:
                    self.note("P006", "environment image name must not be empty", image_tok.span)
                self.expect_kw("container")
                ctech = self.refs("a container technology")
                self.expect_kw("service")
                stech = self.refs("a service technology")
                env = OperatingEnvironment(image, tuple(ctech), tuple(stech), self.span_from(kw))
            elif kw.text == "instances":
                low = self.integer("a minimum instance count")
                self.expect_punct("..")
                high = self.integer("a maximum instance count")
                bounds = (low, high)
            else:
                deploys = self.refs("an artifact")
        span = self.span_from(start)
        for clause, value in (("environment", env), ("instances", bounds), ("deploys", deploys)):
            if value is None:
                self.note("P004", f"container {name!r} needs an {clause!r} clause", span)
        return Container(
            QualifiedName((name,)),
            env or OperatingEnvironment("", (), ()),
            (bounds or (1, 1))[0],
            (bounds or (1, 1))[1],
            tuple(deploys or ()),
            span,
        )

    def registration(self) -> DiscoverabilityRegistration:
        start = self.expect_kw(*REGISTRATION_KINDS)
        name = self.name("a registry name")
        self.expect_kw("registers")
        registered = self.refs("an artifact")
        return DiscoverabilityRegistration(
            REGISTRATION_KINDS[start.text], QualifiedName((name,)), tuple(registered), self.span_from(start)
        )


def _parse(tokens: Sequence[Token], viewpoint: Viewpoint) -> ParseUnit:
    return _Parser(tokens, viewpoint).parse_unit()


def parse_data(tokens: Sequence[Token]) -> ParseUnit:
    return _parse(tokens, Viewpoint.DATA)


def parse_service(tokens: Sequence[Token]) -> ParseUnit:
    return _parse(tokens, Viewpoint.SERVICE)


def parse_operation(tokens: Sequence[Token]) -> ParseUnit:
    return _parse(tokens, Viewpoint.OPERATION)


def parse_source(source: str, file: str, viewpoint: Optional[Viewpoint] = None) -> ParseUnit:
    """Tokenize and parse one file; the viewpoint defaults to the one bound to the file extension."""
    viewpoint = viewpoint or viewpoint_of(file)
    if viewpoint is None:
        raise ValueError(f"unrecognized model file extension: {file}")
    tokens, lex_errors = tokenize_tolerant(source, file)
    unit = _parse(tokens, viewpoint)
    if lex_errors:
        # a parse error on the very token the lexer already complained about adds nothing
        lexed = {(d.span.start_line, d.span.start_col) for d in lex_errors}
        parsed = [d for d in unit.diagnostics if (d.span.start_line, d.span.start_col) not in lexed]
        diags = tuple(sorted(lex_errors + parsed, key=Diagnostic.sort_key))
        unit = ParseUnit(unit.viewpoint, unit.namespace, unit.imports, unit.declarations, diags, unit.file)
    return unit
