import pytest

from fixtures import demo_sources
from msaforge import dict_loader, load_model, validate
from msaforge.errors import FileNotFound, ImportCycle, LinkError, ParseFailed, ViewpointLayerViolation
from msaforge.linker import canonical_path, edit_distance, import_target, resolve_imports
from msaforge.model import DataObject, ServiceOperation

DATA = "namespace shop\nstructure Order { id: int }\nstructure Price { amount: float }\n"


def load(sources, entries=None):
    return load_model(entries or sorted(sources), dict_loader(sources))


def link_codes(sources):
    with pytest.raises(LinkError) as exc:
        load(sources)
    return [d.code for d in exc.value.diagnostics]


def service(body, imports='import "shop.msad" as s\n'):
    return {"shop.msad": DATA, "svc.msas": "namespace svc\n" + imports + body}


def test_paths():
    assert canonical_path("a/./b/../c.msad") == "a/c.msad"
    assert import_target("x/y/s.msas", "../d/a.msad") == "x/d/a.msad"


def test_edit_distance():
    assert edit_distance("kitten", "sitting") == 3
    assert edit_distance("", "abc") == 3
    assert edit_distance("same", "same") == 0


def test_import_order_puts_dependencies_first():
    sources = {
        "ops.msao": 'namespace o\nimport "svc.msas" as v\n',
        "svc.msas": 'namespace v\nimport "d/b.msad" as b\nimport "d/a.msad" as a\n',
        "d/a.msad": "namespace a\n",
        "d/b.msad": 'namespace b\nimport "a.msad" as a\n',
    }
    graph = resolve_imports(["ops.msao"], dict_loader(sources))
    assert graph.order == ("d/a.msad", "d/b.msad", "svc.msas", "ops.msao")
    assert ("d/b.msad", "d/a.msad") in graph.edges


def test_entry_order_does_not_matter():
    sources = service("functional microservice M { interface I { operation o(in sync p: s.Order) } contract C { provides I } }")
    assert load(sources, ["svc.msas", "shop.msad"]) == load(sources, ["shop.msad", "svc.msas"])


def test_alias_resolution():
    model = load(service("functional microservice M { interface I { operation o(in sync p: s.Order) } contract C { provides I } }"))
    param = model.resolve("svc.M.I.o.p")
    assert str(param.data_type.name) == "shop.Order"


def test_scope_resolution_innermost_first():
    body = (
        "functional microservice A { interface I { operation f(out sync r: int) } contract C { provides I } }\n"
        "functional microservice B {\n"
        "  interface I { operation f(out sync r: int) operation g(in sync x: int initialized by A.I.f) }\n"
        "  contract C { provides I requires A.I }\n"
        "}\n"
    )
    model = load(service(body, ""))
    g = model.resolve("svc.B.I.g")
    assert str(g.parameters[0].initialized_by.name) == "svc.A.I.f"
    contract = model.resolve("svc.B.C")
    assert [str(r.name) for r in contract.provides] == ["svc.B.I"]
    assert [str(r.name) for r in contract.requires] == ["svc.A.I"]


def test_operation_name_resolves_within_interface():
    body = (
        "functional microservice A { interface I {\n"
        "  operation f(out sync r: int)\n"
        "  operation g(in sync x: int initialized by f)\n"
        "} contract C { provides I } }\n"
    )
    model = load(service(body, ""))
    assert str(model.resolve("svc.A.I.g").parameters[0].initialized_by.name) == "svc.A.I.f"


def test_absolute_name_in_own_namespace():
    sources = {"shop.msad": "namespace shop\nstructure A { x: int }\nstructure B { a: shop.A }\n"}
    model = load(sources)
    assert str(model.resolve("shop.B").fields[0].target.name) == "shop.A"


def test_data_files_sharing_a_namespace_are_merged():
    sources = {
        "a.msad": "namespace shop\nstructure A { x: int }\n",
        "b.msad": 'namespace shop\nimport "a.msad" as a\nstructure B { a: A }\n',
    }
    model = load(sources)
    assert len(model.data_models) == 1
    assert isinstance(model.resolve("shop.A"), DataObject) and isinstance(model.resolve("shop.B"), DataObject)


def test_unresolved_with_suggestion():
    with pytest.raises(LinkError) as exc:
        load({"a.msad": "namespace a\nstructure Order { x: int }\nstructure B { o: Ordr }"})
    (diag,) = exc.value.diagnostics
    assert diag.code == "P101"
    assert "did you mean 'Order'" in diag.message
    assert (diag.span.start_line, diag.span.start_col) == (3, 18)


def test_no_suggestion_beyond_distance_two():
    with pytest.raises(LinkError) as exc:
        load({"a.msad": "namespace a\nstructure Order { x: int }\nstructure B { o: Xyzzy }"})
    assert "did you mean" not in exc.value.diagnostics[0].message


def test_invisible_names_are_unresolved():
    # a file sees only itself and its direct imports
    sources = {"a.msad": "namespace a\nstructure A { x: int }\n", "b.msad": "namespace a\nstructure B { a: A }\n"}
    assert link_codes(sources) == ["P101"]


def test_duplicate_definition():
    assert link_codes({"a.msad": "namespace a\nstructure A { x: int }\nstructure A { y: int }"}) == ["P102"]


def test_duplicate_across_files():
    sources = {
        "a.msad": "namespace a\nstructure A { x: int }\n",
        "b.msad": 'namespace a\nimport "a.msad" as o\nstructure A { y: int }\n',
    }
    assert link_codes(sources) == ["P102"]


def test_technology_names_unique_regardless_of_kind():
    assert link_codes({"o.msao": "namespace o\ntechnology t: container\ntechnology t: service"}) == ["P102"]


def test_kind_mismatch():
    sources = {"a.msad": "namespace a\nlist L { element int }\nstructure B { o: L }"}
    assert link_codes(sources) == ["P103"]


def test_wrong_technology_kind_is_left_to_validation():
    sources = demo_sources()
    old = '"openjdk" container t.docker service t.java-spring\n  instances 1..5'
    new = '"openjdk" container t.rest service t.java-spring\n  instances 1..5'
    sources["deployment.msao"] = sources["deployment.msao"].replace(old, new)
    model = load(sources)
    assert [d.code for d in validate(model)] == ["O006"]


def test_import_cycle():
    sources = {
        "b.msad": 'namespace b\nimport "a.msad" as a\n',
        "a.msad": 'namespace a\nimport "b.msad" as b\n',
    }
    with pytest.raises(ImportCycle) as exc:
        load(sources)
    assert exc.value.cycle == ["a.msad", "b.msad"]
    assert exc.value.diagnostics[0].code == "P104"


def test_missing_import():
    with pytest.raises(FileNotFound) as exc:
        load({"a.msad": 'namespace a\nimport "gone.msad" as g\n'})
    assert exc.value.diagnostics[0].code == "P105"
    assert exc.value.diagnostics[0].span.start_line == 2


@pytest.mark.parametrize(
    "importer, target",
    [("a.msad", "b.msas"), ("a.msad", "b.msao"), ("a.msas", "b.msao"), ("a.msao", "b.msad")],
)
def test_layer_violations(importer, target):
    sources = {importer: f'namespace a\nimport "{target}" as b\n', target: "namespace b\n"}
    with pytest.raises(ViewpointLayerViolation) as exc:
        load(sources)
    assert exc.value.diagnostics[0].code == "P106"


@pytest.mark.parametrize("importer, target", [("a.msad", "b.msad"), ("a.msas", "b.msad"), ("a.msas", "b.msas"), ("a.msao", "b.msas"), ("a.msao", "b.msao")])
def test_allowed_imports(importer, target):
    load({importer: f'namespace a\nimport "{target}" as b\n', target: "namespace b\n"})


def test_parse_errors_stop_linking():
    with pytest.raises(ParseFailed) as exc:
        load({"a.msad": "namespace a\nstructure A { x: $ }"})
    assert "P002" in [d.code for d in exc.value.diagnostics]


def test_cross_viewpoint_binding():
    sources = service(
        "functional microservice M { interface I { operation o(in sync p: s.Order) } contract C { provides I } }"
    )
    sources["ops.msao"] = (
        'namespace ops\nimport "svc.msas" as v\n'
        "technology j: service\ntechnology r: protocol\ntechnology f: format\n"
        'artifact A { contracts v.M.C service j endpoint "h:1" protocol r format f for operation v.M.I.o }\n'
    )
    model = load(sources)
    art = model.resolve("ops.A")
    assert str(art.endpoints[0].operation.name) == "svc.M.I.o"
    assert isinstance(model.resolve(art.endpoints[0].operation.name), ServiceOperation)
    assert str(art.service_technology.name) == "ops.j"
