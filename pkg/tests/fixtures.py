"""Shared fixtures: the demo corpus and single-rule mutations of it."""

from __future__ import annotations

from pathlib import Path

from msaforge import dict_loader, load_model

ROOT = Path(__file__).resolve().parent.parent
DEMO = ROOT / "demo"
CORPUS = Path(__file__).resolve().parent / "corpus"


def demo_sources() -> dict[str, str]:
    return {p.name: p.read_text(encoding="utf-8") for p in sorted(DEMO.iterdir()) if p.suffix.startswith(".ms")}


def load_sources(sources: dict[str, str]):
    return load_model(sorted(sources), dict_loader(sources))


# code -> list of (file, old text, new text); each edit must match exactly once
MUTATIONS: dict[str, list[tuple[str, str, str]]] = {
    "D001": [("shop.msad", "  name: string\n", "  name: string\n  name: int\n")],
    "D002": [("shop.msad", "structure Price {", "structure Nothing {\n}\n\nstructure Price {")],
    "D003": [("shop.msad", "structure Price {", "structure Node {\n  next: Node\n}\n\nstructure Price {")],
    "S001": [("audit.msas", "infrastructure microservice AuditLog {", "infrastructure microservice Idle {\n}\n\ninfrastructure microservice AuditLog {")],
    "S002": [("audit.msas", "  contract AuditContract {", "  interface Silent {\n  }\n\n  contract AuditContract {")],
    "S003a": [("checkout.msas", "    provides Checkout\n", "    provides Checkout, pay.PaymentService.Payments\n")],
    "S003b": [("checkout.msas", "    requires pay.PaymentService.Payments\n", "    requires pay.PaymentService.Payments, Checkout\n")],
    "S004": [
        (
            "payment.msas",
            "    operation pay(",
            "    operation refund(in sync receipt: shop.PaymentReceipt initialized by pay)\n    operation pay(",
        )
    ],
    "S005": [("checkout.msas", "in sync price: shop.Price initialized by", "out sync price: shop.Price initialized by")],
    "S006": [("checkout.msas", "pr.PricingService.Pricing.quote", "pr.PricingService.Pricing.forecast")],
    "S007": [
        (
            "audit.msas",
            "infrastructure microservice AuditLog {",
            "functional microservice Ping {\n  interface P {\n"
            "    operation ping(inout sync v: int initialized by Pong.Q.pong)\n  }\n}\n\n"
            "functional microservice Pong {\n  interface Q {\n"
            "    operation pong(inout sync v: int initialized by Ping.P.ping)\n  }\n}\n\n"
            "infrastructure microservice AuditLog {",
        )
    ],
    "S008": [("audit.msas", "    operation record(", "    operation flush()\n    operation record(")],
    "S009": [("checkout.msas", "pr.PricingService.Pricing.quote", "pay.PaymentService.Payments.pay")],
    "O001": [("deployment.msao", "  contracts pr.PricingService.PricingContract\n  service t.java-spring\n", "  contracts pr.PricingService.PricingContract\n")],
    "O002": [("deployment.msao", "  contracts pr.PricingService.PricingContract\n", "  contracts pr.PricingService.PricingContract, pay.PaymentService.PaymentContract\n")],
    "O003": [("deployment.msao", "instances 1..5", "instances 5..1")],
    "O004": [
        ("technologies.msao", "technology docker: container", "technology node-express: service\n\ntechnology docker: container"),
        ("deployment.msao", "  contracts pr.PricingService.PricingContract\n  service t.java-spring\n", "  contracts pr.PricingService.PricingContract\n  service t.node-express\n"),
    ],
    "O005": [("deployment.msao", ' format t.json for operation pr.PricingService.Pricing.quote', " format t.json")],
    "O006": [("deployment.msao", "  contracts pr.PricingService.PricingContract\n  service t.java-spring\n", "  contracts pr.PricingService.PricingContract\n  service t.java-spring\n  load-balancer t.hystrix\n")],
    "O007": [("deployment.msao", '"payment:8082" protocol t.rest', '"pricing:8081" protocol t.rest')],
    "O008": [("deployment.msao", "for operation pr.PricingService.Pricing.quote", "for contract pay.PaymentService.PaymentContract")],
    "O009": [
        (
            "audit.msas",
            "infrastructure microservice AuditLog {",
            "infrastructure microservice Metrics {\n  interface Sink {\n    operation push(in async v: int)\n  }\n\n"
            "  contract MetricsContract {\n    provides Sink\n  }\n}\n\ninfrastructure microservice AuditLog {",
        )
    ],
    "O010": [("deployment.msao", "registers AuditArtifact, CheckoutArtifact", "registers CheckoutArtifact")],
}


def mutated_sources(code: str) -> dict[str, str]:
    sources = demo_sources()
    for name, old, new in MUTATIONS[code]:
        count = sources[name].count(old)
        if count != 1:
            raise AssertionError(f"{code}: expected one match of {old!r} in {name}, found {count}")
        sources[name] = sources[name].replace(old, new)
    return sources
