import pytest

from msaforge.diagnostics import CATALOG, CODE_PATTERN, VALIDATION_RULES, Diagnostic, Severity, SourceSpan, sort_diagnostics


def span(line, col, file="a.msad"):
    return SourceSpan(file, line, col, line, col + 1)


def test_render():
    d = Diagnostic("S007", "cycle", span(3, 5))
    assert d.severity is Severity.ERROR
    assert d.render() == "a.msad:3:5: error[S007] cycle"
    assert Diagnostic("O010", "lonely").render() == "<model>:0:0: warning[O010] lonely"


def test_colored_render_keeps_text():
    text = Diagnostic("D003", "loop", span(1, 1)).render(color=True)
    assert "\x1b[33mwarning\x1b[0m[D003] loop" in text


def test_unknown_code_rejected():
    with pytest.raises(ValueError):
        Diagnostic("X001", "nope")


def test_catalog_codes_are_well_formed():
    assert all(CODE_PATTERN.fullmatch(code) for code in CATALOG)
    assert len(VALIDATION_RULES) == 23


def test_ordering_by_position_then_code():
    diags = [
        Diagnostic("S004", "b", span(2, 1)),
        Diagnostic("O010", "c"),
        Diagnostic("S001", "a", span(2, 1)),
        Diagnostic("D001", "z", span(1, 9, "b.msad")),
        Diagnostic("D002", "y", span(1, 1)),
    ]
    assert [d.code for d in sort_diagnostics(diags)] == ["O010", "D002", "S001", "S004", "D001"]


def test_json_form():
    d = Diagnostic("O007", "dup", span(4, 2), related=(span(1, 2),))
    assert d.to_json() == {
        "code": "O007",
        "severity": "error",
        "message": "dup",
        "span": {"file": "a.msad", "startLine": 4, "startCol": 2, "endLine": 4, "endCol": 3},
        "related": [{"file": "a.msad", "startLine": 1, "startCol": 2, "endLine": 1, "endCol": 3}],
    }


def test_span_validation():
    with pytest.raises(ValueError):
        SourceSpan("a", 3, 1, 2, 1)
    assert str(span(1, 2).to(span(4, 7))) == "a.msad:1:2"
    assert span(1, 2).to(span(4, 7)).end_line == 4
