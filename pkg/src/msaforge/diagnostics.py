"""Source spans, coded diagnostics and the published rule catalog."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional


class Severity(str, enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True, order=True)
class SourceSpan:
    """A region of a source file. Lines and columns are 1-based, the end column is exclusive."""

    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __post_init__(self) -> None:
        if (self.start_line, self.start_col) > (self.end_line, self.end_col):
            raise ValueError(f"span end precedes start: {self}")

    def __str__(self) -> str:
        return f"{self.file}:{self.start_line}:{self.start_col}"

    def to(self, other: "SourceSpan") -> "SourceSpan":
        return SourceSpan(self.file, self.start_line, self.start_col, other.end_line, other.end_col)


# code -> (severity, short title)
CATALOG: dict[str, tuple[Severity, str]] = {
    # frontend
    "P001": (Severity.ERROR, "unexpected token"),
    "P002": (Severity.ERROR, "lexical error"),
    "P003": (Severity.ERROR, "missing namespace header"),
    "P004": (Severity.ERROR, "missing required clause"),
    "P005": (Severity.ERROR, "duplicate clause"),
    "P006": (Severity.ERROR, "invalid value"),
    "P007": (Severity.ERROR, "duplicate import alias"),
    # linker
    "P101": (Severity.ERROR, "unresolved reference"),
    "P102": (Severity.ERROR, "duplicate definition"),
    "P103": (Severity.ERROR, "kind mismatch"),
    "P104": (Severity.ERROR, "import cycle"),
    "P105": (Severity.ERROR, "file not found"),
    "P106": (Severity.ERROR, "viewpoint layer violation"),
    # data viewpoint
    "D001": (Severity.ERROR, "duplicate field name"),
    "D002": (Severity.ERROR, "empty structure"),
    "D003": (Severity.WARNING, "recursive structure nesting"),
    # service viewpoint
    "S001": (Severity.ERROR, "microservice without interfaces"),
    "S002": (Severity.ERROR, "interface without operations"),
    "S003a": (Severity.ERROR, "contract provides a foreign interface"),
    "S003b": (Severity.ERROR, "contract requires an own interface"),
    "S004": (Severity.ERROR, "parameter initialized by an operation of the same microservice"),
    "S005": (Severity.ERROR, "output parameter cannot be initialized"),
    "S006": (Severity.ERROR, "initializer operation is not implemented"),
    "S007": (Severity.ERROR, "parameter initialization cycle"),
    "S008": (Severity.WARNING, "implemented operation without parameters"),
    "S009": (Severity.WARNING, "initializer provides no value of the parameter's type"),
    # operation viewpoint
    "O001": (Severity.ERROR, "artifact without exactly one service technology"),
    "O002": (Severity.ERROR, "artifact bundles contracts of different microservices"),
    "O003": (Severity.ERROR, "invalid instance bounds"),
    "O004": (Severity.ERROR, "service technology unsupported by container environment"),
    "O005": (Severity.ERROR, "endpoint must target exactly one operation or contract"),
    "O006": (Severity.ERROR, "technology of wrong kind"),
    "O007": (Severity.ERROR, "duplicate endpoint address and protocol"),
    "O008": (Severity.ERROR, "endpoint target outside bundled contracts"),
    "O009": (Severity.WARNING, "microservice contracts are never deployed"),
    "O010": (Severity.WARNING, "artifact is not discoverable"),
}

CODE_PATTERN = re.compile(r"[DSOP][0-9]{3}[ab]?")

VALIDATION_RULES: tuple[str, ...] = tuple(c for c in CATALOG if c[0] in "DSO")


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    span: Optional[SourceSpan] = None
    related: tuple[SourceSpan, ...] = ()
    severity: Severity = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.code not in CATALOG:
            raise ValueError(f"unknown diagnostic code {self.code!r}")
        if self.severity is None:
            object.__setattr__(self, "severity", CATALOG[self.code][0])

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def sort_key(self) -> tuple:
        if self.span is None:
            return ("", 0, 0, self.code, self.message)
        return (self.span.file, self.span.start_line, self.span.start_col, self.code, self.message)

    def render(self, color: bool = False) -> str:
        where = str(self.span) if self.span is not None else "<model>:0:0"
        sev = self.severity.value
        if color:
            sev = ("\x1b[31m" if self.is_error else "\x1b[33m") + sev + "\x1b[0m"
        return f"{where}: {sev}[{self.code}] {self.message}"

    def to_json(self) -> dict:
        out: dict = {
            "code": self.code,
            "severity": self.severity.value,
            "message": self.message,
            "span": _span_json(self.span),
        }
        if self.related:
            out["related"] = [_span_json(s) for s in self.related]
        return out


def _span_json(span: Optional[SourceSpan]) -> Optional[dict]:
    if span is None:
        return None
    return {
        "file": span.file,
        "startLine": span.start_line,
        "startCol": span.start_col,
        "endLine": span.end_line,
        "endCol": span.end_col,
    }


def sort_diagnostics(diags: Iterable[Diagnostic]) -> list[Diagnostic]:
    return sorted(diags, key=Diagnostic.sort_key)


def has_errors(diags: Iterable[Diagnostic]) -> bool:
    return any(d.is_error for d in diags)
