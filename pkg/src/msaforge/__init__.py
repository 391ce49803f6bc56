"""Toolchain for viewpoint-specific microservice architecture models.

Three textual languages describe a system: data (``.msad``), service
(``.msas``) and operation (``.msao``) models. Files are parsed, linked into a
single :class:`~msaforge.model.Model`, validated, analyzed, and turned into
interface descriptors and deployment manifests.
"""

from .analyzer import (
    EdgeKind,
    InteractionEdge,
    InteractionGraph,
    coupling_metrics,
    dependency_graph,
    detect_cycles,
    export_dot,
    export_json,
)
from .codegen import GenerationRequest, Target, gen_deployment_manifest, gen_interface_descriptors, generate
from .diagnostics import Diagnostic, Severity, SourceSpan
from .errors import (
    AddressUnparsable,
    DanglingReference,
    FileNotFound,
    GenerationRefused,
    ImportCycle,
    InvariantViolation,
    LexError,
    LinkError,
    MalformedDocument,
    MsaforgeError,
    OutputConflict,
    ParseFailed,
    ViewpointLayerViolation,
)
from .formatter import format_unit
from .lexer import tokenize
from .linker import dict_loader, link, load_model, resolve_imports
from .model import Model, QualifiedName, resolve, structural_equals
from .parser import ParseUnit, Viewpoint, parse_data, parse_operation, parse_service, parse_source
from .serialize import canonical_deserialize, canonical_serialize
from .validator import check_invariants, validate

__version__ = "0.1.0"

__all__ = [
    "AddressUnparsable",
    "DanglingReference",
    "Diagnostic",
    "EdgeKind",
    "FileNotFound",
    "GenerationRefused",
    "GenerationRequest",
    "ImportCycle",
    "InteractionEdge",
    "InteractionGraph",
    "InvariantViolation",
    "LexError",
    "LinkError",
    "MalformedDocument",
    "Model",
    "MsaforgeError",
    "OutputConflict",
    "ParseFailed",
    "ParseUnit",
    "QualifiedName",
    "Severity",
    "SourceSpan",
    "Target",
    "Viewpoint",
    "ViewpointLayerViolation",
    "__version__",
    "canonical_deserialize",
    "canonical_serialize",
    "check_invariants",
    "coupling_metrics",
    "dependency_graph",
    "detect_cycles",
    "dict_loader",
    "export_dot",
    "export_json",
    "format_unit",
    "gen_deployment_manifest",
    "gen_interface_descriptors",
    "generate",
    "link",
    "load_model",
    "parse_data",
    "parse_operation",
    "parse_service",
    "parse_source",
    "resolve",
    "resolve_imports",
    "structural_equals",
    "tokenize",
    "validate",
]
