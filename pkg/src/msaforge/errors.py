"""Exception types raised across the toolchain."""

from __future__ import annotations

from typing import Optional, Sequence

from .diagnostics import Diagnostic, SourceSpan


class MsaforgeError(Exception):
    """Base class for all toolchain failures."""


class LexError(MsaforgeError):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(f"{span}: {message}")
        self.message = message
        self.span = span


class DiagnosticError(MsaforgeError):
    """A failure that carries one or more coded diagnostics."""

    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(d.render() for d in self.diagnostics))


class ParseFailed(DiagnosticError):
    pass


class LinkError(DiagnosticError):
    pass


class ImportCycle(LinkError):
    def __init__(self, cycle: Sequence[str], diagnostics: Sequence[Diagnostic]):
        self.cycle = list(cycle)
        super().__init__(diagnostics)


class FileNotFound(LinkError):
    def __init__(self, path: str, diagnostics: Sequence[Diagnostic]):
        self.path = path
        super().__init__(diagnostics)


class ViewpointLayerViolation(LinkError):
    pass


class ModelDocumentError(MsaforgeError):
    pass


class MalformedDocument(ModelDocumentError):
    pass


class DanglingReference(ModelDocumentError):
    def __init__(self, name: str, message: str):
        super().__init__(message)
        self.name = name


class InvariantViolation(ModelDocumentError):
    def __init__(self, message: str, rule: Optional[str] = None):
        super().__init__(f"[{rule}] {message}" if rule else message)
        self.rule = rule


class GenerationRefused(DiagnosticError):
    pass


class OutputConflict(MsaforgeError):
    def __init__(self, paths: Sequence[str]):
        self.paths = list(paths)
        super().__init__("refusing to overwrite: " + ", ".join(self.paths))


class AddressUnparsable(UserWarning):
    """An endpoint address has no ``host:port`` shape; no port is published for it."""
