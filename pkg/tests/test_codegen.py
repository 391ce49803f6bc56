import json
import os
import warnings

import pytest
import yaml

from fixtures import CORPUS, demo_sources, load_sources, mutated_sources
from msaforge import load_model
from msaforge.codegen import (
    GenerationRequest,
    Target,
    endpoint_port,
    gen_deployment_manifest,
    gen_interface_descriptors,
    generate,
)
from msaforge.errors import AddressUnparsable, GenerationRefused, OutputConflict


@pytest.fixture(scope="module")
def demo():
    return load_sources(demo_sources())


def test_descriptor_files(demo):
    files = gen_interface_descriptors(demo)
    assert sorted(files) == [
        "audit.AuditLog.interface.json",
        "checkout.CheckoutService.interface.json",
        "payment.PaymentService.interface.json",
        "pricing.PricingService.interface.json",
    ]


def test_descriptor_content(demo):
    doc = json.loads(gen_interface_descriptors(demo)["pricing.PricingService.interface.json"])
    assert doc["name"] == "pricing.PricingService" and doc["type"] == "FUNCTIONAL"
    quote, forecast = doc["interfaces"][0]["operations"]
    assert quote["endpoints"] == [{"address": "pricing:8081", "format": "json", "protocol": "rest"}]
    assert forecast["notImplemented"] is True and forecast["endpoints"] == []
    order = quote["parameters"][0]
    assert order["type"] == "shop.Order"
    assert order["schema"]["lines"] == [{"price": {"amount": "float", "currency": "string"}, "quantity": "int", "sku": "string"}]
    assert order["schema"]["customer"]["tags"] == ["string"]


def test_contract_endpoints(demo):
    doc = json.loads(gen_interface_descriptors(demo)["payment.PaymentService.interface.json"])
    assert doc["contractEndpoints"] == [
        {
            "address": "payment:8082",
            "contract": "payment.PaymentService.PaymentContract",
            "format": "xml",
            "protocol": "rest",
            "provides": ["payment.PaymentService.Payments"],
        }
    ]


def test_endpoints_on_not_implemented_operations_are_dropped():
    sources = demo_sources()
    sources["deployment.msao"] = sources["deployment.msao"].replace(
        "for operation pr.PricingService.Pricing.quote", "for operation pr.PricingService.Pricing.forecast"
    )
    doc = json.loads(gen_interface_descriptors(load_sources(sources))["pricing.PricingService.interface.json"])
    assert [op["endpoints"] for op in doc["interfaces"][0]["operations"]] == [[], []]


def test_recursive_types_use_definitions():
    sources = mutated_sources("D003")
    sources["audit.msas"] = sources["audit.msas"].replace("in async order: shop.Order", "in async order: shop.Node")
    doc = json.loads(gen_interface_descriptors(load_sources(sources))["audit.AuditLog.interface.json"])
    param = doc["interfaces"][0]["operations"][0]["parameters"][0]
    assert param["schema"] == {"next": {"$ref": "shop.Node"}}
    assert doc["definitions"] == {"shop.Node": {"next": {"$ref": "shop.Node"}}}


def test_refuses_invalid_models():
    model = load_sources(mutated_sources("O003"))
    with pytest.raises(GenerationRefused) as exc:
        gen_deployment_manifest(model)
    assert [d.code for d in exc.value.diagnostics] == ["O003"]
    with pytest.raises(GenerationRefused):
        gen_interface_descriptors(model)


def test_warnings_do_not_block_generation():
    gen_deployment_manifest(load_sources(mutated_sources("O010")))


def test_manifest(demo):
    doc = yaml.safe_load(gen_deployment_manifest(demo))
    assert doc["version"] == "3.8"
    box = doc["services"]["deploy.CheckoutBox"]
    assert box["image"] == "openjdk"
    assert box["deploy"] == {"replicas": 1}
    assert box["x-msa-max-instances"] == 5
    assert box["ports"] == [{"target": 8080, "published": 8080}]
    assert box["labels"]["msa.load-balancer"] == "ribbon"
    assert box["x-msa-discovery"] == ["deploy.eureka"] and box["x-msa-gateway"] == ["deploy.zuul"]
    back = doc["services"]["deploy.BackOffice"]
    assert [p["target"] for p in back["ports"]] == [5672, 8081, 8082]
    assert back["x-msa-gateway"] == []


@pytest.mark.parametrize(
    "address, port",
    [("h:80", 80), ("amqp://q:5672", 5672), ("h:8080/path", 8080), ("http://router/plan", None), ("h:99999", None), ("h", None)],
)
def test_endpoint_port(address, port):
    assert endpoint_port(address) == port


def test_unparsable_address_warns():
    model = load_model(sorted(str(p) for p in (CORPUS / "hand").iterdir()))
    with pytest.warns(AddressUnparsable, match="router/plan"):
        text = gen_deployment_manifest(model)
    assert yaml.safe_load(text)["services"]["rollout.Pods"]["ports"] == [
        {"target": 9000, "published": 9000},
        {"target": 9001, "published": 9001},
    ]


def test_generate_writes_and_refuses_to_clobber(demo, tmp_path):
    out = tmp_path / "out"
    written = generate(GenerationRequest(Target.DEPLOYMENT_MANIFEST, str(out)), demo)
    assert written == [os.path.join(str(out), "docker-compose.yml")]
    before = (out / "docker-compose.yml").read_text()
    (out / "docker-compose.yml").write_text("local edits")
    with pytest.raises(OutputConflict):
        generate(GenerationRequest(Target.DEPLOYMENT_MANIFEST, str(out)), demo)
    assert (out / "docker-compose.yml").read_text() == "local edits"
    generate(GenerationRequest(Target.DEPLOYMENT_MANIFEST, str(out), overwrite=True), demo)
    assert (out / "docker-compose.yml").read_text() == before


def test_conflict_leaves_other_outputs_unwritten(demo, tmp_path):
    (tmp_path / "pricing.PricingService.interface.json").write_text("{}")
    with pytest.raises(OutputConflict) as exc:
        generate(GenerationRequest(Target.INTERFACE_DESCRIPTORS, str(tmp_path)), demo)
    assert [os.path.basename(p) for p in exc.value.paths] == ["pricing.PricingService.interface.json"]
    assert sorted(os.listdir(tmp_path)) == ["pricing.PricingService.interface.json"]


def test_generation_is_deterministic(demo):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert gen_deployment_manifest(demo) == gen_deployment_manifest(load_sources(demo_sources()))
    assert gen_interface_descriptors(demo) == gen_interface_descriptors(load_sources(demo_sources()))
