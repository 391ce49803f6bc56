import pytest

from msaforge.lexer import tokenize
from msaforge.model import (
    CommPattern,
    CommType,
    DataField,
    DataObjectField,
    MicroserviceType,
    PrimitiveType,
    QualifiedName,
    RegistrationKind,
    TechnologyKind,
)
from msaforge.parser import Viewpoint, parse_data, parse_operation, parse_service, parse_source, viewpoint_of


def codes(unit):
    return [d.code for d in unit.diagnostics]


def test_viewpoint_follows_extension():
    assert viewpoint_of("a/b.msad") is Viewpoint.DATA
    assert viewpoint_of("b.msas") is Viewpoint.SERVICE
    assert viewpoint_of("b.msao") is Viewpoint.OPERATION
    assert viewpoint_of("b.txt") is None
    with pytest.raises(ValueError):
        parse_source("namespace x", "b.txt")


def test_data_model():
    unit = parse_data(
        tokenize(
            "namespace shop.core\n"
            "structure Order {\n  id: int\n  who: Customer\n  lines: list Lines\n}\n"
            "list Lines { element Line }\n"
            "list Tags { element string }\n",
            "d.msad",
        )
    )
    assert codes(unit) == []
    assert unit.namespace == QualifiedName.parse("shop.core")
    order, lines, tags = unit.declarations
    assert order.fields[0] == DataField("id", PrimitiveType.INT)
    assert isinstance(order.fields[1], DataObjectField) and not order.fields[1].is_list
    assert order.fields[2].is_list and str(order.fields[2].target.name) == "Lines"
    assert str(lines.element.name) == "Line"
    assert tags.element is PrimitiveType.STRING


def test_spans_cover_declarations():
    unit = parse_source("namespace n\n\nstructure A {\n  x: int\n}\n", "s.msad")
    span = unit.declarations[0].span
    assert (span.file, span.start_line, span.start_col, span.end_line, span.end_col) == ("s.msad", 3, 1, 5, 2)
    field_span = unit.declarations[0].fields[0].span
    assert (field_span.start_line, field_span.start_col, field_span.end_col) == (4, 3, 9)


def test_service_model():
    unit = parse_service(
        tokenize(
            'namespace s\nimport "d.msad" as d\n'
            "infrastructure microservice a.B {\n"
            "  interface I {\n"
            "    operation go(in sync x: d.T initialized by o.P.Q.r, out async y: int, inout sync z: float)\n"
            "    not-implemented operation later()\n"
            "  }\n"
            "  contract C { provides I requires o.P.Q }\n"
            "}\n",
            "s.msas",
        )
    )
    assert codes(unit) == []
    assert unit.imports[0].path == "d.msad" and unit.imports[0].alias == "d"
    svc = unit.declarations[0]
    assert svc.name == QualifiedName.parse("a.B") and svc.type is MicroserviceType.INFRASTRUCTURE
    go, later = svc.interfaces[0].operations
    assert [p.pattern for p in go.parameters] == [CommPattern.IN_ONLY, CommPattern.OUT_ONLY, CommPattern.INOUT]
    assert [p.comm_type for p in go.parameters] == [CommType.SYNC, CommType.ASYNC, CommType.SYNC]
    assert str(go.parameters[0].initialized_by.name) == "o.P.Q.r"
    assert later.not_implemented and later.parameters == ()
    assert [str(r.name) for r in svc.contracts[0].requires] == ["o.P.Q"]


def test_operation_model():
    unit = parse_operation(
        tokenize(
            "namespace o\n"
            "technology spring: service technology docker: container technology rest: protocol\n"
            "technology json: format technology lb: load-balancer technology cb: circuit-breaker\n"
            "artifact A {\n  contracts x.C\n  service spring\n  load-balancer lb\n  circuit-breaker cb\n"
            '  endpoint "h:1" protocol rest format json for operation x.I.op\n'
            '  endpoint "h:2" protocol rest format json for contract x.C\n}\n'
            'container K {\n  environment "openjdk" container docker service spring\n  instances 1..5\n  deploys A\n}\n'
            "discovery eureka registers A\ngateway zuul registers A\n",
            "o.msao",
        )
    )
    assert codes(unit) == []
    techs = unit.declarations[:6]
    assert [t.kind for t in techs] == list(TechnologyKind)
    art, box, disc, gw = unit.declarations[6:]
    assert art.service_technology.name == QualifiedName.parse("spring")
    assert str(art.endpoints[0].operation.name) == "x.I.op" and art.endpoints[0].contract is None
    assert str(art.endpoints[1].contract.name) == "x.C"
    assert box.environment.name == "openjdk" and (box.min_instances, box.max_instances) == (1, 5)
    assert disc.kind is RegistrationKind.SERVICE_DISCOVERY and gw.kind is RegistrationKind.API_GATEWAY


def test_keywords_allowed_as_names():
    unit = parse_source("namespace service.list\nstructure format { element: int  list: list of }\n", "k.msad")
    assert codes(unit) == []
    fields = unit.declarations[0].fields
    assert [f.name for f in fields] == ["element", "list"]
    assert fields[1].is_list and str(fields[1].target.name) == "of"


def test_missing_namespace():
    unit = parse_source("structure A { x: int }", "m.msad")
    assert codes(unit) == ["P003"]
    assert unit.declarations and unit.namespace is None
    assert parse_source("", "e.msad").fatal


def test_unexpected_token_then_recovery():
    unit = parse_source("namespace n\nstructure A { x int }\nstructure B { y: int }\n", "r.msad")
    assert codes(unit) == ["P001"]
    assert [d.name for d in unit.declarations] == ["B"]
    assert "expected ':'" in unit.diagnostics[0].message


def test_missing_brace_recovers_at_next_declaration():
    unit = parse_source("namespace n\nstructure A {\n  x: int\nstructure B {\n  list: int\n}\n", "r.msad")
    assert codes(unit) == ["P001"]
    assert unit.diagnostics[0].span.start_line == 4
    assert [d.name for d in unit.declarations] == ["B"]


def test_one_diagnostic_per_damaged_region():
    src = "namespace n\nstructure A { x: : : : }\nstructure B { y: ( ) }\nstructure C { z: int }\n"
    unit = parse_source(src, "r.msad")
    assert codes(unit) == ["P001", "P001"]
    assert [d.name for d in unit.declarations] == ["C"]


def test_lex_errors_merge_without_duplicates():
    unit = parse_source('namespace n\nstructure A { s: "open\n}', "l.msad")
    assert codes(unit) == ["P002"]


def test_duplicate_alias():
    unit = parse_source('namespace n\nimport "a.msad" as x\nimport "b.msad" as x\n', "i.msad")
    assert codes(unit) == ["P007"]


def test_missing_and_duplicate_clauses():
    unit = parse_source(
        "namespace o\nartifact A { service s }\n"
        "artifact B { contracts c contracts d service s load-balancer l load-balancer m }\n"
        'container K { environment "" container d service s }\n',
        "c.msao",
    )
    assert sorted(codes(unit)) == ["P004", "P004", "P004", "P005", "P005", "P006"]


def test_empty_endpoint_address():
    unit = parse_source('namespace o\nartifact A { contracts c service s endpoint "" protocol p format f }', "e.msao")
    assert codes(unit) == ["P006"]


def test_contract_without_provides():
    unit = parse_source("namespace s\nfunctional microservice M { contract C { requires x.I } }", "c.msas")
    assert codes(unit) == ["P004"]


def test_wrong_viewpoint_declaration():
    unit = parse_source("namespace s\nstructure A { x: int }\n", "w.msas")
    assert codes(unit) == ["P001"]
    assert "expected a declaration" in unit.diagnostics[0].message
